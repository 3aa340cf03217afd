// staircase-lab: reproducible chip-firing experiments on graphs and step
// graphons. Every command is deterministic in its flags; --threads only
// changes scheduling, never output bytes.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "staircase/io.hpp"

namespace {

using namespace staircase;

constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct OutSink {
  std::string path;  // empty: stdout
  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    os << text;
  }
};

int default_threads() {
  if (const char* env = std::getenv("STAIRCASE_LAB_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

bool looks_like_json(const std::string& path) {
  return path.size() > 5 && path.substr(path.size() - 5) == ".json";
}

/// Grid specs: either a comma list of rationals or "linspace:<count>[:<lo>:<hi>]".
std::vector<Rational> parse_grid(const std::string& spec, const Rational& lo,
                                 const Rational& hi) {
  std::vector<Rational> grid;
  if (spec.rfind("linspace:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 2 && parts.size() != 4)
      throw std::invalid_argument("grid spec: linspace:<count>[:<lo>:<hi>]");
    long long count = std::stoll(parts[1]);
    if (count < 2) throw std::invalid_argument("linspace needs at least 2 points");
    Rational a = lo, b = hi;
    if (parts.size() == 4) {
      a = parse_rational(parts[2]);
      b = parse_rational(parts[3]);
    }
    for (long long i = 0; i < count; ++i)
      grid.push_back(a + (b - a) * make_rational(i, count - 1));
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(parse_rational(tok));
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw std::invalid_argument("grid must be strictly increasing");
  return grid;
}

Json provenance(const std::string& command, std::initializer_list<std::pair<std::string, Json>> kv) {
  Json j;
  j["command"] = command;
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// mu values may be given as rationals or as the token "p/log2".
Rational resolve_mu(const std::string& text, const Rational& p) {
  if (text == "p/log2" || text == "p/ln2") {
    double v = to_double(p) / std::log(2.0);
    return Rational(v);  // exact binary rational of the double
  }
  return parse_rational(text);
}

int cmd_activity(const std::string& model_path, const std::string& config_path,
                 long long max_steps, const OutSink& out) {
  ChipConfig cfg = read_config_file(config_path);
  ActivityOptions opts;
  opts.max_steps = max_steps;
  ActivityEstimate est = looks_like_json(model_path)
                             ? activity(read_graphon_file(model_path), cfg, opts)
                             : activity(read_graph_file(model_path), cfg, opts);
  Json j = activity_json(est);
  j["config"] = provenance("activity", {{"model", model_path},
                                        {"chips", config_path},
                                        {"max_steps", max_steps}});
  out.write(dump_json(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chip-firing activity laboratory"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads (scheduling only)")
      ->check(CLI::PositiveNumber);

  std::string model_path, config_path, out_path, format = "csv";
  long long budget = 100000;

  auto* activity_cmd = app.add_subcommand("activity", "activity of a configuration");
  activity_cmd->add_option("model", model_path, "graph text file or graphon JSON")->required();
  activity_cmd->add_option("chips", config_path, "chip configuration JSON")->required();
  activity_cmd->add_option("--max-steps", budget, "cycle search budget");
  activity_cmd->add_option("--out", out_path, "output path (default stdout)");

  std::string y_grid_spec = "linspace:65:0:1";
  auto* diagram_cmd = app.add_subcommand("diagram", "activity diagram over a y grid");
  diagram_cmd->add_option("model", model_path)->required();
  diagram_cmd->add_option("chips", config_path)->required();
  diagram_cmd->add_option("--y-grid", y_grid_spec, "comma rationals or linspace:<count>[:lo:hi]");
  diagram_cmd->add_option("--budget", budget, "cycle search budget per sample");
  diagram_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  diagram_cmd->add_option("--out", out_path);

  long long n = 128;
  std::string p_str = "1/2", mu_grid_spec = "linspace:33";
  std::uint64_t seed = 1;
  long long rot_iters = 10000;
  auto* geometric_cmd = app.add_subcommand("geometric", "geometric mu-sweep vs reference curve");
  geometric_cmd->add_option("--n", n, "vertex count")->check(CLI::PositiveNumber);
  geometric_cmd->add_option("--p", p_str, "edge probability (rational)");
  geometric_cmd->add_option("--mu-grid", mu_grid_spec,
                            "comma rationals or linspace:<count> over [0, p/log2]");
  geometric_cmd->add_option("--seed", seed);
  geometric_cmd->add_option("--budget", budget);
  geometric_cmd->add_option("--rotation-iters", rot_iters);
  geometric_cmd->add_option("--out", out_path);

  std::string mu_str = "p/log2", x0_str = "0", samples_out;
  int sample_grid = 1024;
  auto* rotation_cmd = app.add_subcommand("rotation", "rotation number of the reference lift");
  rotation_cmd->add_option("--mu", mu_str, "mu as rational or 'p/log2'");
  rotation_cmd->add_option("--p", p_str, "family parameter p");
  rotation_cmd->add_option("--iters", rot_iters);
  rotation_cmd->add_option("--x0", x0_str);
  rotation_cmd->add_option("--samples-out", samples_out, "also write (x, f(x)) CSV here");
  rotation_cmd->add_option("--sample-grid", sample_grid, "grid size for --samples-out")
      ->check(CLI::PositiveNumber);
  rotation_cmd->add_option("--out", out_path);

  std::string model_b_path;
  auto* cutdist_cmd = app.add_subcommand("cutdist", "labeled cut distance of two graphons");
  cutdist_cmd->add_option("graphon_a", model_path)->required();
  cutdist_cmd->add_option("graphon_b", model_b_path)->required();
  cutdist_cmd->add_option("--out", out_path);

  long long mix_steps = 32;
  auto* mixing_cmd = app.add_subcommand("mixing", "Markov kernel total-variation mixing");
  mixing_cmd->add_option("graphon", model_path)->required();
  mixing_cmd->add_option("--steps", mix_steps)->check(CLI::PositiveNumber);
  mixing_cmd->add_option("--out", out_path);

  long long window = 720, start = 2;
  auto* counter_cmd = app.add_subcommand("counterexample", "oscillating odometer sequence");
  counter_cmd->add_option("--start", start, "leftmost represented index");
  counter_cmd->add_option("--window", window, "window length N");
  counter_cmd->add_option("--out", out_path);

  long long trials = 10000;
  std::string eta_str = "1/10";
  auto* conc_cmd = app.add_subcommand("concentration", "degree concentration experiment");
  conc_cmd->add_option("--n", n)->check(CLI::PositiveNumber);
  conc_cmd->add_option("--p", p_str);
  conc_cmd->add_option("--eta", eta_str);
  conc_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
  conc_cmd->add_option("--seed", seed);
  conc_cmd->add_option("--out", out_path);

  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  OutSink out{out_path};
  try {
    if (app.got_subcommand(activity_cmd))
      return cmd_activity(model_path, config_path, budget, out);

    if (app.got_subcommand(diagram_cmd)) {
      ChipConfig cfg = read_config_file(config_path);
      std::vector<Rational> grid = parse_grid(y_grid_spec, Rational(0), Rational(1));
      SweepOptions opts;
      opts.budget = budget;
      opts.budget_cap = budget * 4;
      opts.threads = threads;
      std::vector<DiagramSample> samples =
          looks_like_json(model_path)
              ? activity_diagram(read_graphon_file(model_path), cfg, grid, opts)
              : activity_diagram(read_graph_file(model_path), cfg, grid, opts);
      Json prov = provenance("diagram", {{"model", model_path},
                                         {"chips", config_path},
                                         {"y_grid", y_grid_spec},
                                         {"budget", budget}});
      if (format == "json") {
        Json j;
        j["config"] = prov;
        j["samples"] = Json::array();
        for (const auto& s : samples) {
          Json row = activity_json(s.estimate);
          row["parameter"] = format_rational(s.parameter);
          row["smoothness_hits"] = s.smoothness_hits;
          j["samples"].push_back(row);
        }
        j["plateaus"] = Json::array();
        for (const auto& pl : plateau_detect(samples)) {
          Json row;
          row["from"] = format_rational(pl.from);
          row["to"] = format_rational(pl.to);
          row["value"] = format_rational(pl.value);
          if (pl.snapped) row["snapped"] = format_rational(*pl.snapped);
          row["resolved"] = pl.resolved;
          j["plateaus"].push_back(row);
        }
        out.write(dump_json(j));
      } else {
        std::ostringstream os;
        write_sweep_csv(os, samples, prov.dump());
        out.write(os.str());
      }
      return 0;
    }

    if (app.got_subcommand(geometric_cmd)) {
      Rational p = parse_rational(p_str);
      Rational mu_max = Rational(to_double(p) / std::log(2.0));
      std::vector<Rational> grid = parse_grid(mu_grid_spec, Rational(0), mu_max);
      GeometricOptions opts;
      opts.budget = budget;
      opts.budget_cap = budget * 4;
      opts.rotation_iters = rot_iters;
      opts.threads = threads;
      GeometricSweepResult res = geometric_sweep(n, p, grid, seed, opts);
      Json prov = provenance("geometric", {{"n", n},
                                           {"p", p_str},
                                           {"mu_grid", mu_grid_spec},
                                           {"seed", seed},
                                           {"budget", budget},
                                           {"rotation_iters", rot_iters}});
      std::ostringstream os;
      write_geometric_csv(os, res, prov.dump());
      out.write(os.str());
      return 0;
    }

    if (app.got_subcommand(rotation_cmd)) {
      Rational p = parse_rational(p_str);
      CircleLift lift = (mu_str == "p/log2" || mu_str == "p/ln2")
                            ? CircleLift::geometric_limit_from_ratio(0.5, to_double(p))
                            : CircleLift::geometric_limit(to_double(resolve_mu(mu_str, p)),
                                                          to_double(p));
      RotationInterval r = rotation_number(lift, rot_iters, parse_rational(x0_str));
      Json j = rotation_json(r);
      Json prov = provenance("rotation", {{"mu", mu_str},
                                          {"p", p_str},
                                          {"iters", rot_iters},
                                          {"x0", x0_str}});
      j["config"] = prov;
      if (!samples_out.empty()) {
        std::ofstream os(samples_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + samples_out);
        write_map_csv(os, lift, sample_grid, prov.dump());
      }
      out.write(dump_json(j));
      return 0;
    }

    if (app.got_subcommand(cutdist_cmd)) {
      StepGraphon a = read_graphon_file(model_path);
      StepGraphon b = read_graphon_file(model_b_path);
      CutDistanceResult r = cut_distance(a, b);
      Json j = cutdist_json(r);
      j["config"] = provenance("cutdist", {{"graphon_a", model_path},
                                           {"graphon_b", model_b_path}});
      out.write(dump_json(j));
      return 0;
    }

    if (app.got_subcommand(mixing_cmd)) {
      StepGraphon w = read_graphon_file(model_path);
      MixingReport rep = markov_mixing(w, mix_steps);
      Json prov = provenance("mixing", {{"graphon", model_path}, {"steps", mix_steps}});
      std::ostringstream os;
      write_mixing_csv(os, rep, prov.dump());
      out.write(os.str());
      return 0;
    }

    if (app.got_subcommand(counter_cmd)) {
      CounterexampleSpec spec;
      spec.start = start;
      spec.length = window;
      CounterexampleResult res = counterexample_sequence(spec);
      if (!res.crosscheck_ok) throw std::logic_error("counterexample crosscheck failed");
      Json prov = provenance("counterexample", {{"start", start}, {"window", window}});
      std::ostringstream os;
      write_counterexample_csv(os, res, prov.dump());
      out.write(os.str());
      return 0;
    }

    if (app.got_subcommand(conc_cmd)) {
      ConcentrationReport rep =
          degree_concentration(n, parse_rational(p_str), parse_rational(eta_str), trials, seed);
      Json j;
      j["n"] = rep.n;
      j["trials"] = rep.trials;
      j["violations"] = rep.violations;
      j["frequency"] = rep.frequency;
      j["bound"] = rep.bound;
      j["std_error"] = rep.std_error;
      j["within"] = rep.within;
      j["config"] = provenance("concentration", {{"n", n},
                                                 {"p", p_str},
                                                 {"eta", eta_str},
                                                 {"trials", trials},
                                                 {"seed", seed}});
      out.write(dump_json(j));
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
