#pragma once

#include <map>
#include <string>

#include "capoint/errors.hpp"

namespace capoint {

// "key = value" configuration file. '#' starts a full-line comment; blank
// lines are skipped. Values keep their raw text; typed getters validate on
// access and name the file and line in their diagnostics.
struct ConfigFile {
  std::string path;
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
};

ConfigFile load_config_file(const std::string& path);

// Writes content to a temporary file in the target directory, then renames it
// over the destination, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace capoint
