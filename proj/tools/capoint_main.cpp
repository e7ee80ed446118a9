#include <array>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "capoint/cap1d.hpp"
#include "capoint/config.hpp"
#include "capoint/errors.hpp"
#include "capoint/expr.hpp"
#include "capoint/field2d.hpp"
#include "capoint/geom2d.hpp"
#include "capoint/numerics.hpp"
#include "capoint/sturm.hpp"
#include "json.hpp"

namespace {

using namespace capoint;
using num::format_num;

const char kUsage[] =
    R"(usage: capoint <subcommand> [options]

subcommands:
  cap1d          capacity point of a 1-D coefficient
  eigen1d        k-th Dirichlet eigenpair of (a u')' = -lambda u
  theorem-check  capacity point vs warmest point over a profile family
  heat1d         Crank-Nicolson heat evolution and its argmax trajectory
  robin2d        harmonic center of a planar domain
  eigen2d        principal eigenpair of a planar domain
  flux-probe     condenser flux from a small disk to the outer boundary
  openproblem    grid-refinement experiment comparing c_x and m_x in 2-D

common options:
  --config FILE       read defaults from a "key = value" file (flags win)

cap1d:    --coeff EXPR|FILE.csv [--grid N] [--emit-curve FILE] [--tol T]
eigen1d:  --coeff EXPR|FILE.csv [--k K] [--steps N] [--emit FILE] [--tol T]
theorem-check:
          --family constant|linear|exp|cubic|random|stock [--params LIST]
          [--seed S] [--steps N] [--emit FILE] [--tol T]
heat1d:   --coeff EXPR|FILE.csv --u0 EXPR --tend T --dt D [--cells N]
          [--emit FILE]
robin2d:  --f EXPR | --disk R  --h H [--sweep --emit FILE] [--emit-grid FILE]
eigen2d:  --f EXPR | --disk R  --h H [--bc dirichlet|mixed] [--emit FILE]
flux-probe:
          --f EXPR | --disk R  --h H --p X[,Y] --eps E [--bc dirichlet|mixed]
openproblem:
          --f EXPR --bc dirichlet|mixed --levels H1,H2,... [--emit FILE]

Grid spacings (--h, --levels entries) accept a fraction "1/64", a decimal, or
an integer denominator "64". Coefficient sources ending in ".csv" are read as
"x,a" tables; anything else is parsed as an expression in x.
)";

double parse_double(const std::string& name, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw ValidationError("option '--" + name + "': not a number: '" + text + "'");
  return v;
}

long parse_long(const std::string& name, const std::string& text) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw ValidationError("option '--" + name + "': not an integer: '" + text + "'");
  return v;
}

struct OptionInfo {
  bool is_flag = false;
};

// Merged view of command-line options and an optional config file; the
// command line wins. Conversion diagnostics name the config line when the
// value came from a file.
class Params {
 public:
  Params(std::string sub, std::map<std::string, OptionInfo> spec)
      : sub_(std::move(sub)), spec_(std::move(spec)) {
    spec_.emplace("config", OptionInfo{false});
  }

  void parse(int argc, char** argv, int start) {
    for (int i = start; i < argc; ++i) {
      const std::string tok = argv[i];
      if (tok.rfind("--", 0) != 0)
        throw ValidationError("unexpected argument '" + tok + "'");
      std::string name = tok.substr(2);
      std::string value;
      bool has_value = false;
      const std::size_t eq = name.find('=');
      if (eq != std::string::npos) {
        value = name.substr(eq + 1);
        name = name.substr(0, eq);
        has_value = true;
      }
      const auto it = spec_.find(name);
      if (it == spec_.end())
        throw ValidationError("unknown option '--" + name + "' for subcommand '" + sub_ + "'");
      if (it->second.is_flag) {
        if (has_value) throw ValidationError("option '--" + name + "' takes no value");
        value = "true";
      } else if (!has_value) {
        if (i + 1 >= argc) throw ValidationError("option '--" + name + "' requires a value");
        value = argv[++i];
      }
      cli_[name] = value;
    }
    if (cli_.count("config")) {
      cfg_ = load_config_file(cli_.at("config"));
      for (const auto& [key, val] : cfg_->values) {
        (void)val;
        if (key == "config" || !spec_.count(key))
          throw ValidationError("config file '" + cfg_->path + "' line " +
                                std::to_string(cfg_->lines.at(key)) + ": unknown key '" + key +
                                "' for subcommand '" + sub_ + "'");
      }
    }
  }

  bool has(const std::string& name) const {
    return cli_.count(name) != 0 || (cfg_ && cfg_->has(name));
  }

  std::string str(const std::string& name) const {
    if (const auto* v = lookup(name)) return *v;
    throw ValidationError("missing required option '--" + name + "'");
  }

  std::string str_or(const std::string& name, const std::string& def) const {
    if (const auto* v = lookup(name)) return *v;
    return def;
  }

  double num(const std::string& name) const {
    if (cli_.count(name)) return parse_double(name, cli_.at(name));
    if (cfg_ && cfg_->has(name)) return cfg_->get_double(name);
    throw ValidationError("missing required option '--" + name + "'");
  }

  double num_or(const std::string& name, double def) const {
    return has(name) ? num(name) : def;
  }

  long integer_or(const std::string& name, long def) const {
    if (cli_.count(name)) return parse_long(name, cli_.at(name));
    if (cfg_ && cfg_->has(name)) return cfg_->get_long(name);
    return def;
  }

  long integer_in(const std::string& name, long def, long lo, long hi) const {
    const long v = integer_or(name, def);
    if (v < lo || v > hi)
      throw ValidationError("option '--" + name + "' out of range [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
    return v;
  }

  bool flag(const std::string& name) const {
    const auto* v = lookup(name);
    if (!v) return false;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ValidationError("option '--" + name + "' must be true or false, got '" + *v + "'");
  }

 private:
  const std::string* lookup(const std::string& name) const {
    const auto it = cli_.find(name);
    if (it != cli_.end()) return &it->second;
    if (cfg_ && cfg_->has(name)) return &cfg_->raw(name);
    return nullptr;
  }

  std::string sub_;
  std::map<std::string, OptionInfo> spec_;
  std::map<std::string, std::string> cli_;
  std::optional<ConfigFile> cfg_;
};

CoefficientProfile load_coeff(const Params& p, const std::string& opt) {
  const std::string src = p.str(opt);
  if (src.size() >= 4 && src.compare(src.size() - 4, 4, ".csv") == 0)
    return CoefficientProfile::load_table_csv(src);
  return CoefficientProfile::from_expr(parse(src));
}

// "1/64", "0.015625", or a plain denominator "64".
double parse_spacing(const std::string& name, const std::string& text) {
  double v = 0.0;
  const std::size_t slash = text.find('/');
  if (slash != std::string::npos) {
    const double a = parse_double(name, text.substr(0, slash));
    const double b = parse_double(name, text.substr(slash + 1));
    if (b == 0.0) throw ValidationError("option '--" + name + "': division by zero in spacing");
    v = a / b;
  } else {
    v = parse_double(name, text);
  }
  if (!(v > 0.0)) throw ValidationError("option '--" + name + "' must be positive");
  return v > 1.0 ? 1.0 / v : v;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<double> parse_list(const std::string& name, const std::string& text) {
  std::vector<double> out;
  for (const std::string& piece : split_commas(text)) out.push_back(parse_double(name, piece));
  return out;
}

std::array<double, 2> parse_point(const std::string& name, const std::string& text) {
  const std::vector<std::string> parts = split_commas(text);
  if (parts.size() == 1) return {parse_double(name, parts[0]), 0.0};
  if (parts.size() == 2)
    return {parse_double(name, parts[0]), parse_double(name, parts[1])};
  throw ValidationError("option '--" + name + "' must be 'x' or 'x,y'");
}

BCMode parse_bc(const std::string& text) {
  if (text == "dirichlet") return BCMode::Dirichlet;
  if (text == "mixed") return BCMode::Mixed;
  throw ValidationError("option '--bc' must be 'dirichlet' or 'mixed'");
}

DomainSpec domain_from(const Params& p) {
  const bool has_f = p.has("f");
  const bool has_disk = p.has("disk");
  if (has_f == has_disk) throw ValidationError("give exactly one of '--f' or '--disk'");
  if (has_f) return DomainSpec::profile_strip(parse(p.str("f")));
  const double r = p.num("disk");
  if (!(r > 0.0)) throw ValidationError("option '--disk' must be positive");
  return DomainSpec::disk(0.0, 0.0, r);
}

void emit_text(const Params& p, const std::string& opt, const std::string& content) {
  if (p.has(opt))
    write_file_atomic(p.str(opt), content);
  else
    std::fputs(content.c_str(), stdout);
}

int run_cap1d(int argc, char** argv) {
  Params p("cap1d", {{"coeff", {}}, {"grid", {}}, {"emit-curve", {}}, {"tol", {}}});
  p.parse(argc, argv, 2);
  const CoefficientProfile a = load_coeff(p, "coeff");
  const ResistanceMap rm(a, p.num_or("tol", 1e-10));
  const double c = capacity_point(rm);
  if (p.has("emit-curve")) {
    const long n = p.integer_in("grid", 1001, 3, 1000000);
    const FluxCurve fc = flux_curve(rm, static_cast<int>(n));
    std::ostringstream os;
    os << "s,F\n";
    for (std::size_t i = 0; i < fc.s.size(); ++i)
      os << format_num(fc.s[i]) << ',' << format_num(fc.flux[i]) << '\n';
    write_file_atomic(p.str("emit-curve"), os.str());
  }
  std::printf("c = %s\n", format_num(c).c_str());
  return 0;
}

int run_eigen1d(int argc, char** argv) {
  Params p("eigen1d", {{"coeff", {}}, {"k", {}}, {"steps", {}}, {"emit", {}}, {"tol", {}}});
  p.parse(argc, argv, 2);
  const CoefficientProfile a = load_coeff(p, "coeff");
  const ResistanceMap rm(a, p.num_or("tol", 1e-10));
  const int k = static_cast<int>(p.integer_in("k", 0, 0, 64));
  const int steps = static_cast<int>(p.integer_in("steps", 4096, 64, 1048576));
  const EigenPair1D ep = kth_eigen(rm, k, steps);
  if (p.has("emit")) {
    std::ostringstream os;
    os << "x,u\n";
    for (std::size_t i = 0; i < ep.x.size(); ++i)
      os << format_num(ep.x[i]) << ',' << format_num(ep.u[i]) << '\n';
    write_file_atomic(p.str("emit"), os.str());
  }
  std::printf("lambda = %s\n", format_num(ep.lambda).c_str());
  std::printf("m = %s\n", format_num(ep.argmax_x).c_str());
  return 0;
}

struct FamilyRow {
  std::string name;
  CoefficientProfile prof;
};

std::string linear_name(double k) {
  return k == 1.0 ? "1+x" : "1+" + format_num(k) + "*x";
}

std::string exp_name(double k) {
  return k == 1.0 ? "exp(x)" : "exp(" + format_num(k) + "*x)";
}

std::string cubic_name(double e) { return "(1+x)^" + format_num(e); }

void push_expr_row(std::vector<FamilyRow>& rows, const std::string& name) {
  rows.push_back({name, CoefficientProfile::from_expr(parse(name))});
}

std::vector<FamilyRow> build_family(const Params& p) {
  const std::string family = p.str("family");
  std::optional<std::vector<double>> params;
  if (p.has("params")) params = parse_list("params", p.str("params"));

  std::vector<FamilyRow> rows;
  if (family == "constant") {
    for (double v : params.value_or(std::vector<double>{1.0})) {
      if (!(v > 0.0)) throw ValidationError("constant coefficient must be positive");
      push_expr_row(rows, format_num(v));
    }
  } else if (family == "linear") {
    for (double k : params.value_or(std::vector<double>{0.5, 1.0, 2.0, 5.0, 10.0}))
      push_expr_row(rows, linear_name(k));
  } else if (family == "exp" || family == "exponential") {
    for (double k : params.value_or(std::vector<double>{0.5, 1.0, 2.0}))
      push_expr_row(rows, exp_name(k));
  } else if (family == "cubic") {
    for (double e : params.value_or(std::vector<double>{3.0})) push_expr_row(rows, cubic_name(e));
  } else if (family == "random") {
    long count = 50;
    if (params) {
      if (params->size() != 1)
        throw ValidationError("family 'random' takes a single count parameter");
      count = static_cast<long>((*params)[0]);
    }
    if (count < 1 || count > 10000)
      throw ValidationError("option '--params' out of range [1, 10000]");
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.integer_or("seed", 42)));
    for (long i = 0; i < count; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "random_%02ld", i);
      rows.push_back({buf, random_monotone_profile(rng)});
    }
  } else if (family == "stock") {
    if (params) throw ValidationError("family 'stock' takes no --params");
    push_expr_row(rows, "1");
    for (double k : {0.5, 1.0, 2.0, 5.0, 10.0}) push_expr_row(rows, linear_name(k));
    for (double k : {0.5, 1.0, 2.0}) push_expr_row(rows, exp_name(k));
    push_expr_row(rows, cubic_name(3.0));
  } else {
    throw ValidationError("unknown family '" + family +
                          "' (expected constant, linear, exp, cubic, random, or stock)");
  }
  return rows;
}

int run_theorem_check(int argc, char** argv) {
  Params p("theorem-check", {{"family", {}},
                             {"params", {}},
                             {"seed", {}},
                             {"steps", {}},
                             {"emit", {}},
                             {"tol", {}}});
  p.parse(argc, argv, 2);
  const std::vector<FamilyRow> rows = build_family(p);
  const double tol = p.num_or("tol", 1e-10);
  const int steps = static_cast<int>(p.integer_in("steps", 4096, 64, 1048576));

  std::vector<ProfileCheck> checks(rows.size());
  num::parallel_for(static_cast<int>(rows.size()), [&](int i) {
    const ResistanceMap rm(rows[i].prof, tol);
    checks[i] = check_profile(rm, steps);
  });

  std::ostringstream os;
  os << "profile,c,m,margin,pass\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].name << ',' << format_num(checks[i].c) << ',' << format_num(checks[i].m)
       << ',' << format_num(checks[i].margin) << ',' << (checks[i].pass ? "true" : "false")
       << '\n';
  }
  emit_text(p, "emit", os.str());
  return 0;
}

int run_heat1d(int argc, char** argv) {
  Params p("heat1d", {{"coeff", {}}, {"u0", {}}, {"tend", {}}, {"dt", {}}, {"cells", {}},
                      {"emit", {}}});
  p.parse(argc, argv, 2);
  const CoefficientProfile a = load_coeff(p, "coeff");
  const Expr u0 = parse(p.str("u0"));
  const double tend = p.num("tend");
  const double dt = p.num("dt");
  const int cells = static_cast<int>(p.integer_in("cells", 4096, 16, 1048576));
  const HeatTrajectory tr =
      heat_evolve(a, [&](double x) { return u0(x); }, tend, dt, cells);
  if (p.has("emit")) {
    std::ostringstream os;
    os << "t,argmax,max\n";
    for (const HeatSample& s : tr.samples)
      os << format_num(s.time) << ',' << format_num(s.argmax_x) << ','
         << format_num(s.max_value) << '\n';
    write_file_atomic(p.str("emit"), os.str());
  }
  const HeatSample& last = tr.samples.back();
  std::printf("final_argmax = %s\n", format_num(last.argmax_x).c_str());
  std::printf("final_max = %s\n", format_num(last.max_value).c_str());
  return 0;
}

int run_robin2d(int argc, char** argv) {
  Params p("robin2d", {{"f", {}},
                       {"disk", {}},
                       {"h", {}},
                       {"sweep", {true}},
                       {"emit", {}},
                       {"emit-grid", {}}});
  p.parse(argc, argv, 2);
  const DomainSpec spec = domain_from(p);
  const Grid2D g = build_grid(spec, parse_spacing("h", p.str("h")));
  if (p.has("emit-grid")) {
    std::ostringstream os;
    write_grid_csv(g, os);
    write_file_atomic(p.str("emit-grid"), os.str());
  }
  const RobinSweep sw = harmonic_center(g);
  if (p.flag("sweep")) {
    if (!p.has("emit")) throw ValidationError("option '--sweep' requires '--emit'");
    std::ostringstream os;
    os << "x,y,value\n";
    for (std::size_t i = 0; i < sw.candidates.size(); ++i)
      os << format_num(sw.candidates[i][0]) << ',' << format_num(sw.candidates[i][1]) << ','
         << format_num(sw.values[i]) << '\n';
    write_file_atomic(p.str("emit"), os.str());
  }
  std::printf("c_x = %s\n", format_num(sw.refined_x).c_str());
  std::printf("c_y = %s\n", format_num(sw.refined_y).c_str());
  return 0;
}

int run_eigen2d(int argc, char** argv) {
  Params p("eigen2d", {{"f", {}}, {"disk", {}}, {"h", {}}, {"bc", {}}, {"emit", {}}});
  p.parse(argc, argv, 2);
  const DomainSpec spec = domain_from(p);
  const BCMode mode = parse_bc(p.str_or("bc", "dirichlet"));
  const Grid2D g = build_grid(spec, parse_spacing("h", p.str("h")));
  const EigenPair2D ep = principal_eigen2d(g, mode);
  if (p.has("emit")) {
    std::ostringstream os;
    os << "x,y,value\n";
    for (int u = 0; u < g.n_unknowns; ++u) {
      const int nd = g.node[u];
      os << format_num(g.xc(nd % g.nx)) << ',' << format_num(g.yc(nd / g.nx)) << ','
         << format_num(ep.values[u]) << '\n';
    }
    write_file_atomic(p.str("emit"), os.str());
  }
  std::printf("lambda = %s\n", format_num(ep.lambda).c_str());
  std::printf("m_x = %s\n", format_num(ep.m_x).c_str());
  std::printf("m_y = %s\n", format_num(ep.m_y).c_str());
  return 0;
}

int run_flux_probe(int argc, char** argv) {
  Params p("flux-probe",
           {{"f", {}}, {"disk", {}}, {"h", {}}, {"bc", {}}, {"p", {}}, {"eps", {}}});
  p.parse(argc, argv, 2);
  const DomainSpec spec = domain_from(p);
  const BCMode mode = parse_bc(p.str_or("bc", "dirichlet"));
  const Grid2D g = build_grid(spec, parse_spacing("h", p.str("h")));
  const std::array<double, 2> pt = parse_point("p", p.str("p"));
  const FluxProbeResult fr = flux_probe(g, mode, pt[0], pt[1], p.num("eps"));
  std::printf("flux = %s\n", format_num(fr.flux).c_str());
  std::printf("effective_radius = %s\n", format_num(fr.effective_radius).c_str());
  std::printf("contour_agreement = %s\n", format_num(fr.contour_gap_rel).c_str());
  return 0;
}

int run_openproblem(int argc, char** argv) {
  Params p("openproblem", {{"f", {}}, {"bc", {}}, {"levels", {}}, {"emit", {}}});
  p.parse(argc, argv, 2);
  const DomainSpec spec = DomainSpec::profile_strip(parse(p.str("f")));
  const BCMode mode = parse_bc(p.str("bc"));
  std::vector<double> levels;
  for (const std::string& piece : split_commas(p.str("levels")))
    levels.push_back(parse_spacing("levels", piece));
  const ExperimentReport rep = open_problem_experiment(spec, mode, levels);

  nlohmann::ordered_json j;
  j["domain"] = rep.domain;
  j["bc"] = rep.bc;
  j["levels"] = nlohmann::ordered_json::array();
  for (const ExperimentLevel& lv : rep.levels) {
    nlohmann::ordered_json jl;
    jl["h"] = lv.h;
    jl["c_x"] = lv.c_x;
    jl["m_x"] = lv.m_x;
    jl["gap"] = lv.gap;
    j["levels"].push_back(jl);
  }
  nlohmann::ordered_json ex;
  ex["c_x"] = rep.extrapolated_c;
  ex["m_x"] = rep.extrapolated_m;
  ex["order_c"] = rep.order_c;
  ex["order_m"] = rep.order_m;
  j["extrapolated"] = ex;
  j["status"] = rep.status;
  emit_text(p, "emit", j.dump(2) + "\n");
  return 0;
}

int run(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return 1;
  }
  const std::string sub = argv[1];
  if (sub == "help" || sub == "--help" || sub == "-h") {
    std::fputs(kUsage, stdout);
    return 0;
  }
  if (sub == "cap1d") return run_cap1d(argc, argv);
  if (sub == "eigen1d") return run_eigen1d(argc, argv);
  if (sub == "theorem-check") return run_theorem_check(argc, argv);
  if (sub == "heat1d") return run_heat1d(argc, argv);
  if (sub == "robin2d") return run_robin2d(argc, argv);
  if (sub == "eigen2d") return run_eigen2d(argc, argv);
  if (sub == "flux-probe") return run_flux_probe(argc, argv);
  if (sub == "openproblem") return run_openproblem(argc, argv);
  throw ValidationError("unknown subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
