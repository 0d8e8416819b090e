// Command-line front end: gchn <scenario> [flags]

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gchn/experiments.hpp"

namespace {

template <class T>
std::vector<T> split_list(const std::string& text, T (*parse)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse(item));
  return out;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

/// "3,4,5" or the inclusive range "3..7".
std::vector<int> parse_n_list(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return split_list<int>(text, parse_int);
  const int lo = parse_int(text.substr(0, dots)), hi = parse_int(text.substr(dots + 2));
  if (hi < lo) throw std::invalid_argument("empty range " + text);
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

/// "0,0.01,0.1" or "log:lo:hi:count".
std::vector<double> parse_t_grid(const std::string& text) {
  if (text.rfind("log:", 0) == 0) {
    std::vector<double> parts;
    std::stringstream ss(text.substr(4));
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(gchn::parse_extended(item));
    if (parts.size() != 3) throw std::invalid_argument("expected log:lo:hi:count, got " + text);
    return gchn::log_grid(parts[0], parts[1], static_cast<int>(parts[2]));
  }
  return split_list<double>(text, gchn::parse_extended);
}

void print_verdicts(const gchn::ExperimentReport& r) {
  for (const auto& v : r.verdicts) {
    std::printf("[%s] %s%s measured=%s range=[%s, %s]%s%s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(),
                v.gating ? "" : " (informational)", gchn::detail::num(v.measured).c_str(),
                gchn::detail::num(v.lower).c_str(), gchn::detail::num(v.upper).c_str(), v.note.empty() ? "" : "  ",
                v.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral experiments for the generalized Camassa-Holm-Novikov equation"};
  app.require_subcommand(1, 1);

  std::string config_file, s_text, p_text, r_text, n_text, t_text, out;
  int k = 0, threads = 0;
  double half_length = 0.0, dt = 0.0, horizon = 0.0;
  std::size_t grid_points = 0;

  for (const char* name : {"norms", "taylor", "limit", "nonuniform", "conservation", "mms"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
    sub->add_option("--config", config_file, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    sub->add_option("--k", k, "nonlinearity exponent k >= 1");
    sub->add_option("--s", s_text, "Besov regularity s");
    sub->add_option("--p", p_text, "Besov integrability p (number or inf)");
    sub->add_option("--r", r_text, "Besov summability r (number or inf)");
    sub->add_option("--n-list", n_text, "frequency indices, e.g. 3,4,5 or 3..7");
    sub->add_option("--t-grid", t_text, "output times, e.g. 0,0.01,0.1 or log:1e-3:1e-1:9");
    sub->add_option("--grid-points", grid_points, "grid size N (power of two); default depends on scenario and n");
    sub->add_option("--half-length", half_length, "domain half-length L of [-L, L)");
    sub->add_option("--dt", dt, "time step");
    sub->add_option("--horizon", horizon, "final time");
    sub->add_option("--out", out, "report path (JSON); CSV tables are written alongside");
    sub->add_option("--threads", threads, "worker threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    gchn::ExperimentConfig cfg;
    cfg.scenario = gchn::parse_scenario(sub->get_name());
    if (!config_file.empty()) {
      cfg = gchn::load_config(config_file, cfg);
      cfg.scenario = gchn::parse_scenario(sub->get_name());
    }
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--k")) cfg.k = k;
    if (given("--s")) cfg.besov.s = gchn::parse_extended(s_text);
    if (given("--p")) cfg.besov.p = gchn::parse_extended(p_text);
    if (given("--r")) cfg.besov.r = gchn::parse_extended(r_text);
    if (given("--n-list")) cfg.n_list = parse_n_list(n_text);
    if (given("--t-grid")) cfg.t_grid = parse_t_grid(t_text);
    if (given("--grid-points")) cfg.grid_points = grid_points;
    if (given("--half-length")) cfg.half_length = half_length;
    if (given("--dt")) cfg.dt = dt;
    if (given("--horizon")) cfg.horizon = horizon;
    if (given("--out")) cfg.output_path = out;
    if (given("--threads")) cfg.threads = threads;
    if (cfg.output_path.empty()) cfg.output_path = std::string(gchn::scenario_name(cfg.scenario)) + "_report.json";

    const gchn::ExperimentReport report = gchn::run_experiment(cfg);
    for (const auto& file : gchn::write_report(report, cfg.output_path)) std::printf("wrote %s\n", file.c_str());
    print_verdicts(report);
    return report.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
