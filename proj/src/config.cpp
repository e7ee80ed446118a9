#include "capoint/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace capoint {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

const std::string& ConfigFile::raw(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end())
    throw ValidationError("config file '" + path + "' has no key '" + key + "'");
  return it->second;
}

double ConfigFile::get_double(const std::string& key) const {
  const std::string& text = raw(key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw ValidationError("config file '" + path + "' line " +
                          std::to_string(lines.at(key)) + ": value for '" + key +
                          "' is not a number: '" + text + "'");
  return v;
}

long ConfigFile::get_long(const std::string& key) const {
  const std::string& text = raw(key);
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw ValidationError("config file '" + path + "' line " +
                          std::to_string(lines.at(key)) + ": value for '" + key +
                          "' is not an integer: '" + text + "'");
  return v;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  ConfigFile cfg;
  cfg.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config file '" + path + "' line " + std::to_string(lineno) +
                            ": malformed line (expected key = value)");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config file '" + path + "' line " + std::to_string(lineno) +
                            ": malformed line (expected key = value)");
    for (char c : key) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
        throw ValidationError("config file '" + path + "' line " + std::to_string(lineno) +
                              ": invalid key '" + key + "'");
    }
    if (cfg.values.count(key))
      throw ValidationError("config file '" + path + "' line " + std::to_string(lineno) +
                            ": duplicate key '" + key + "'");
    cfg.values[key] = value;
    cfg.lines[key] = lineno;
  }
  return cfg;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open output file '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw ValidationError("failed writing output file '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot move output into place at '" + path + "': " +
                          std::strerror(errno));
  }
}

}  // namespace capoint
