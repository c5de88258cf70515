#ifndef PPCLUST_EXPERIMENTS_HPP
#define PPCLUST_EXPERIMENTS_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "compare.hpp"
#include "complexes.hpp"
#include "config.hpp"
#include "dists.hpp"
#include "format.hpp"
#include "graphs.hpp"
#include "percolation.hpp"
#include "procgen.hpp"
#include "shotnoise.hpp"
#include "summaries.hpp"
#include "svg.hpp"

#ifndef PPCLUST_VERSION
#define PPCLUST_VERSION "0.1.0"
#endif

namespace ppclust::cli {

inline constexpr const char* kVersion = PPCLUST_VERSION;

/// One output file, written by the single writer at the end of a run.
struct Artifact {
  std::string name;
  std::string content;
};

/// CSV with '.' decimals, %.17g reals and LF line ends.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { rows_.push_back(std::move(header)); }

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& add(double v) { return push(format_csv_real(v)); }
  CsvTable& add(int v) { return push(std::to_string(v)); }
  CsvTable& add(long v) { return push(std::to_string(v)); }
  CsvTable& add(long long v) { return push(std::to_string(v)); }
  CsvTable& add(unsigned long v) { return push(std::to_string(v)); }
  CsvTable& add(unsigned long long v) { return push(std::to_string(v)); }
  CsvTable& add(bool v) { return push(v ? "true" : "false"); }
  CsvTable& add(const char* v) { return push(v); }
  CsvTable& add(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return push(v);
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return push(q + "\"");
  }
  CsvTable& blank() { return push(""); }

  std::string str() const {
    std::string out;
    for (const auto& r : rows_) {
      if (r.size() != width_) throw Error("CsvTable: ragged row");
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

 private:
  CsvTable& push(std::string s) {
    rows_.back().push_back(std::move(s));
    return *this;
  }
  std::size_t width_;
  std::vector<std::vector<std::string>> rows_;
};

using Runner = std::function<std::vector<Artifact>(bool plot)>;

namespace detail {

inline ConfigError config_error(const std::string& where, const std::string& what) {
  return ConfigError(where + ": " + what);
}

template <class F>
auto checked(Config& c, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw config_error(c.origin_of(key), "key '" + key + "': " + e.what());
  }
}

inline void require(bool ok, Config& c, const std::string& key, const std::string& what) {
  if (!ok) throw config_error(c.origin_of(key), "key '" + key + "': " + what);
}

inline std::size_t positive_count(Config& c, const std::string& key, long long fallback) {
  const long long v = c.get_int(key, fallback);
  require(v >= 1, c, key, "must be >= 1");
  return static_cast<std::size_t>(v);
}

inline Metric read_metric(Config& c, const std::string& key, Metric fallback) {
  const std::string m = c.get_string(key, fallback == Metric::periodic ? "periodic" : "euclidean");
  if (m == "periodic") return Metric::periodic;
  if (m == "euclidean") return Metric::euclidean;
  throw config_error(c.origin_of(key), "key '" + key + "': expected periodic or euclidean");
}

inline std::size_t read_dim(Config& c) {
  const long long d = c.get_int("window.dim", 2);
  require(d >= 1 && d <= static_cast<long long>(kMaxDim), c, "window.dim", "must be in [1, 8]");
  return static_cast<std::size_t>(d);
}

/// [0, side)^dim with the configured metric.
inline Window read_window(Config& c, double side, Metric metric) {
  const std::size_t d = read_dim(c);
  const double s = c.get_real("window.side", side);
  require(s > 0 && std::isfinite(s), c, "window.side", "must be positive");
  return Window::cube(d, s, read_metric(c, "window.metric", metric));
}

inline LatticeKind read_lattice(Config& c, const std::string& key) {
  const std::string s = c.get_string(key, "square");
  if (s == "square") return LatticeKind::square;
  if (s == "hex") return LatticeKind::hex;
  throw config_error(c.origin_of(key), "key '" + key + "': expected square or hex");
}

inline Displacement read_displacement(Config& c, const std::string& sec, const std::string& fallback) {
  const std::string key = sec + ".displacement";
  const std::string kind = c.get_string(key, fallback);
  if (kind == "in_cell") return Displacement::in_cell();
  const double scale = c.get_real(sec + ".displacement_scale", 0.1);
  if (kind == "gaussian") return Displacement::gaussian(scale);
  if (kind == "in_ball") return Displacement::in_ball(scale);
  throw config_error(c.origin_of(key), "key '" + key + "': expected in_cell, gaussian or in_ball");
}

inline CountDistribution read_count(Config& c, const std::string& key, const std::optional<std::string>& fallback) {
  return c.typed(key, fallback, [](std::string_view s) { return parse_count_distribution(s); });
}

struct Family {
  GeneratorSpec spec;
  std::string label;
};

/// A [section] describing a generator; `family` selects the process.
inline Family read_generator(Config& c, const std::string& sec, std::optional<std::string> default_family = "poisson") {
  const std::string fkey = sec + ".family";
  const std::string family = c.get_string(fkey, default_family);
  auto r = [&](const char* k, double v) { return c.get_real(sec + "." + k, v); };
  auto b = [&](const char* k, bool v) { return c.get_bool(sec + "." + k, v); };
  GeneratorSpec spec;
  if (family == "poisson") spec = HomogeneousPoisson{r("intensity", 1)};
  else if (family == "square_lattice") spec = SquareLattice{r("spacing", 1), b("stationary", true)};
  else if (family == "hex_lattice") spec = HexLattice{r("spacing", 1), b("stationary", true)};
  else if (family == "bernoulli_lattice")
    spec = BernoulliLattice{r("spacing", 1), r("p", 1), b("stationary", true), read_lattice(c, sec + ".lattice")};
  else if (family == "binomial") spec = BinomialProcess{c.get_int(sec + ".n", 100)};
  else if (family == "perturbed_lattice")
    spec = PerturbedLattice{r("spacing", 1), read_count(c, sec + ".replication", "deterministic(1)"),
                            read_displacement(c, sec, "in_cell"), read_lattice(c, sec + ".lattice")};
  else if (family == "matern") spec = MaternCluster{r("parent_intensity", 1), r("mean_cluster_size", 1), r("cluster_radius", 0.1)};
  else if (family == "thomas") spec = ThomasCluster{r("parent_intensity", 1), r("mean_cluster_size", 1), r("sigma", 0.1)};
  else if (family == "neyman_scott")
    spec = NeymanScott{r("parent_intensity", 1), read_count(c, sec + ".replication", "poisson(1)"),
                       read_displacement(c, sec, "gaussian")};
  else if (family == "mixed_poisson") {
    MixedPoisson m;
    if (c.has(sec + ".mixing")) {
      m.mixing = read_count(c, sec + ".mixing", std::nullopt);
      m.scale = r("scale", 1);
    } else {
      m.weights = c.get_reals(sec + ".weights", "1");
      m.intensities = c.get_reals(sec + ".intensities", "1");
    }
    spec = m;
  } else if (family == "log_gaussian_cox")
    spec = LogGaussianCox{r("field_mean", 0), r("field_variance", 1), r("correlation_length", 1),
                          static_cast<std::size_t>(positive_count(c, sec + ".grid_n", 16))};
  else if (family == "ginibre")
    spec = GinibreTruncated{positive_count(c, sec + ".rank", 40), r("radius", 3)};
  else
    throw config_error(c.origin_of(fkey), "key '" + fkey + "': unknown family '" + family + "'");
  try {
    validate(spec);
  } catch (const Error& e) {
    throw config_error(c.section_origin(sec), "[" + sec + "]: " + e.what());
  }
  const std::string lkey = sec + ".label";
  const std::string label = c.get_string(lkey, family);
  require(!label.empty() && label.find_first_of(",\"\n ") == std::string::npos, c, lkey,
          "labels must be non-empty without commas, quotes or spaces");
  return {spec, label};
}

inline std::uint64_t read_seed(Config& c) {
  const long long s = c.get_int("run.seed", 1);
  require(s >= 0, c, "run.seed", "must be >= 0");
  return static_cast<std::uint64_t>(s);
}

/// r_n = radius_scale * n^radius_exponent
inline std::function<double(double)> read_radius_rule(Config& c) {
  const double scale = c.get_real("experiment.radius_scale", 1);
  const double expo = c.get_real("experiment.radius_exponent", -1);
  require(scale > 0, c, "experiment.radius_scale", "must be positive");
  return [scale, expo](double n) { return scale * std::pow(n, expo); };
}

inline std::vector<std::int64_t> read_n_list(Config& c, const std::string& fallback) {
  const auto v = c.get_ints("experiment.n_list", fallback);
  for (auto n : v) require(n >= 1, c, "experiment.n_list", "entries must be >= 1");
  return {v.begin(), v.end()};
}

inline void require_grid(Config& c, const std::string& key, const std::vector<double>& v, double below) {
  require(!v.empty(), c, key, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 0, c, key, "values must be >= 0");
    require(i == 0 || v[i] > v[i - 1], c, key, "values must increase");
  }
  require(v.back() < below, c, key, "largest value must be below " + format_real(below));
}

/// "exponential(b)", "power_law(b,eps)", "indicator_ball(r)".
inline ResponseFunction parse_response(std::string_view text) {
  text = ppclust::detail::trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw InvalidArgument("response: expected name(args), got '" + std::string(text) + "'");
  const std::string name(ppclust::detail::trim(text.substr(0, open)));
  const auto args = ppclust::detail::split_top_level(text.substr(open + 1, text.size() - open - 2));
  if (name == "exponential" && args.size() == 1) return ResponseFunction::exponential(parse_real(args[0]));
  if (name == "indicator_ball" && args.size() == 1) return ResponseFunction::indicator_ball(parse_real(args[0]));
  if (name == "power_law" && args.size() == 2)
    return ResponseFunction::power_law(parse_real(args[0]), parse_real(args[1]));
  throw InvalidArgument("response: unknown form '" + std::string(text) + "'");
}

inline Artifact plot(const std::string& name, LinePlot p) { return {name, p.render()}; }

inline std::vector<double> values(std::span<const EstimateWithError> e) {
  std::vector<double> v;
  for (const auto& x : e) v.push_back(x.value);
  return v;
}

// ---------------------------------------------------------------------------

inline Runner sample_experiment(Config& c) {
  const auto gen = read_generator(c, "generator");
  const Window w = read_window(c, 10, Metric::periodic);
  const std::size_t reps = positive_count(c, "run.replications", 1);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    std::vector<std::string> header{"replication"};
    for (std::size_t i = 0; i < w.dim(); ++i) header.push_back("x" + std::to_string(i));
    CsvTable t(header);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto p = sample(gen.spec, w, stream.derive(rep));
      for (const auto& x : p.points) {
        t.row().add(rep);
        for (std::size_t i = 0; i < w.dim(); ++i) t.add(x[i]);
      }
    }
    std::vector<Artifact> out{{"points.csv", t.str()}};
    if (want_plot && w.dim() == 2) {
      const auto p = sample(gen.spec, w, stream.derive(0));
      Series s{gen.label, {}, {}, true};
      for (const auto& x : p.points) s.x.push_back(x[0]), s.y.push_back(x[1]);
      out.push_back(plot("points.svg", {"Replication 0", "x0", "x1", {s}}));
    }
    return out;
  };
}

inline Runner summary_experiment(Config& c) {
  const auto gen = read_generator(c, "generator");
  const Window w = read_window(c, 20, Metric::periodic);
  require(w.metric() == Metric::periodic, c, "window.metric", "summary statistics need a periodic window");
  const auto radii = c.get_reals("experiment.radii", "0.25:2:0.25");
  require_grid(c, "experiment.radii", radii, w.min_side() / 2);
  const double bandwidth = c.get_real("experiment.bandwidth", 0);
  const auto scales = c.get_reals("experiment.scales", "0.5,1,2");
  require_grid(c, "experiment.scales", scales, w.min_side());
  require(scales.front() > 0, c, "experiment.scales", "box sides must be positive");
  const int k_max = static_cast<int>(c.get_int("experiment.k_max", 2));
  require(k_max >= 1 && k_max <= 4, c, "experiment.k_max", "must be in [1, 4]");
  const std::size_t placements = positive_count(c, "experiment.placements", static_cast<long long>(kDefaultPlacements));
  const std::size_t reps = positive_count(c, "run.replications", 50);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    const std::size_t d = w.dim();
    const double lambda = intensity(gen.spec, d).value;
    const auto k = ripley_k(gen.spec, w, radii, reps, stream.derive(0));
    const auto g = pair_correlation(gen.spec, w, radii, bandwidth, reps, stream.derive(1));
    CsvTable kt({"r", "k", "k_std_error", "poisson_k", "pcf", "pcf_std_error"});
    std::vector<double> poisson_k;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      poisson_k.push_back(ball_volume(static_cast<int>(d), radii[i]));
      kt.row().add(radii[i]).add(k.estimates[i].value).add(k.estimates[i].std_error).add(poisson_k.back());
      kt.add(g.estimates[i].value).add(g.estimates[i].std_error);
    }

    std::vector<Region> regions;
    for (double s : scales) regions.push_back(Region::box(s));
    const auto counts = region_counts(gen.spec, w, regions, placements, reps, stream.derive(2));
    std::vector<std::string> header{"scale", "void", "void_std_error", "poisson_void"};
    for (int j = 1; j <= k_max; ++j) {
      header.push_back("alpha_" + std::to_string(j));
      header.push_back("alpha_" + std::to_string(j) + "_std_error");
      header.push_back("poisson_alpha_" + std::to_string(j));
    }
    for (const char* h : {"variance", "variance_std_error", "mean_count"}) header.push_back(h);
    CsvTable ct(header);
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double mu = lambda * regions[s].volume(d);
      const auto v = replicate_mean(counts, s, [](std::int64_t n) { return n == 0 ? 1.0 : 0.0; });
      ct.row().add(scales[s]).add(v.value).add(v.std_error).add(std::exp(-mu));
      for (int j = 1; j <= k_max; ++j) {
        const auto a = replicate_mean(counts, s, [j](std::int64_t n) { return ppclust::detail::falling_factorial(n, j); });
        ct.add(a.value).add(a.std_error).add(std::pow(mu, j));
      }
      const auto var = count_variance_from(counts, s);
      ct.add(var.value).add(var.std_error).add(mu);
    }
    std::vector<Artifact> out{{"k_function.csv", kt.str()}, {"counts.csv", ct.str()}};
    if (want_plot)
      out.push_back(plot("k_function.svg", {"Ripley K", "r", "K(r)",
                                            {{gen.label, radii, values(k.estimates)}, {"poisson", radii, poisson_k}}}));
    return out;
  };
}

inline Statistic parse_statistic(Config& c, const std::string& key, const std::string& s) {
  if (s == "voids") return Statistic::voids;
  if (s == "factorial_moments") return Statistic::factorial_moments;
  if (s == "ripley_k") return Statistic::ripley_k;
  if (s == "variance") return Statistic::variance;
  throw config_error(c.origin_of(key), "key '" + key + "': expected weak, voids, factorial_moments, ripley_k or variance");
}

inline Runner compare_experiment(Config& c) {
  const auto a = read_generator(c, "generator");
  const Window w = read_window(c, 20, Metric::periodic);
  const std::string stat = c.get_string("experiment.statistic", "weak");
  const auto scales = c.get_reals("experiment.scales", "0.25,0.5,1,2");
  const std::size_t placements = positive_count(c, "experiment.placements", static_cast<long long>(kDefaultPlacements));
  const std::size_t reps = positive_count(c, "run.replications", 200);
  const RandomStream stream(read_seed(c));
  require(!scales.empty() && scales.front() > 0, c, "experiment.scales", "scales must be positive");
  std::function<std::vector<OrderingReport>()> compute;
  if (stat == "weak") {
    if (c.has_section("generator2")) throw ConfigError("[generator2] is not used by statistic = weak");
    const int k_max = static_cast<int>(c.get_int("experiment.k_max", 3));
    require(k_max >= 1 && k_max <= 4, c, "experiment.k_max", "must be in [1, 4]");
    compute = [=] { return weak_poisson_test(a.spec, w, scales, k_max, reps, stream, placements); };
  } else {
    const Statistic s = parse_statistic(c, "experiment.statistic", stat);
    const auto b = read_generator(c, "generator2", std::nullopt);
    const int k = static_cast<int>(c.get_int("experiment.k", 2));
    require(k >= 1 && k <= 4, c, "experiment.k", "must be in [1, 4]");
    const double la = intensity(a.spec, w.dim()).value, lb = intensity(b.spec, w.dim()).value;
    require(std::abs(la - lb) <= kIntensityMatchTolerance * std::max(la, lb), c, "generator2.family",
            "intensities differ by more than 1% (" + format_real(la) + " vs " + format_real(lb) + ")");
    compute = [=] { return std::vector<OrderingReport>{compare_two(a.spec, b.spec, w, s, scales, reps, stream, k, placements)}; };
  }
  return [=](bool want_plot) {
    const auto reports = compute();
    CsvTable rows({"statistic", "k", "scale", "estimate", "std_error", "reference", "z_score"});
    CsvTable verdicts({"statistic", "k", "verdict", "violation_scale"});
    LinePlot p{"z-scores by scale", "scale", "z", {}, true, false};
    for (const auto& r : reports) {
      const std::string name = r.statistic == Statistic::factorial_moments ? "factorial_moments" : to_string(r.statistic);
      Series s{to_string(r.statistic, r.k), {}, {}};
      for (const auto& row : r.per_scale) {
        rows.row().add(name).add(r.k).add(row.scale).add(row.estimate).add(row.std_error).add(row.reference).add(row.z_score);
        s.x.push_back(row.scale);
        s.y.push_back(row.z_score);
      }
      verdicts.row().add(name).add(r.k).add(to_string(r.verdict));
      if (r.verdict.scale) verdicts.add(*r.verdict.scale);
      else verdicts.blank();
      p.series.push_back(std::move(s));
    }
    std::vector<Artifact> out{{"compare.csv", rows.str()}, {"verdicts.csv", verdicts.str()}};
    if (want_plot) out.push_back(plot("compare.svg", p));
    return out;
  };
}

inline Runner percolation_experiment(Config& c) {
  std::vector<Family> fams{read_generator(c, "generator")};
  if (c.has_section("generator2")) fams.push_back(read_generator(c, "generator2", std::nullopt));
  const Window w = read_window(c, 30, Metric::periodic);
  const auto radii = c.get_reals("experiment.radii", "0.3:0.8:0.025");
  require_grid(c, "experiment.radii", radii, w.metric() == Metric::periodic ? w.min_side() / 4 : INFINITY);
  const bool critical = c.get_bool("experiment.critical", false);
  const double tol = c.get_real("experiment.tol", 0.02);
  require(tol > 0, c, "experiment.tol", "must be positive");
  if (critical) require(w.metric() == Metric::euclidean, c, "window.metric", "critical = true needs a Euclidean window");
  const std::size_t reps = positive_count(c, "run.replications", 100);
  const RandomStream stream(read_seed(c));
  if (fams.size() == 2 && fams[0].label == fams[1].label)
    throw config_error(c.origin_of("generator2.label"), "generator labels must differ");
  return [=](bool want_plot) {
    const bool crossing = w.metric() == Metric::euclidean;
    std::vector<std::string> header{"r"};
    for (const auto& f : fams)
      for (const char* col : {"largest", "largest_se", "second", "second_se", "crossing", "crossing_se"}) {
        if (!crossing && std::string(col).rfind("crossing", 0) == 0) continue;
        header.push_back(f.label + "_" + col);
      }
    std::vector<PercolationSweep> sweeps;
    for (std::size_t i = 0; i < fams.size(); ++i)
      sweeps.push_back(component_fraction_sweep(fams[i].spec, w, radii, reps, stream.derive(i)));
    CsvTable t(header);
    for (std::size_t j = 0; j < radii.size(); ++j) {
      t.row().add(radii[j]);
      for (const auto& s : sweeps) {
        t.add(s.largest_fraction[j].value).add(s.largest_fraction[j].std_error);
        t.add(s.second_fraction[j].value).add(s.second_fraction[j].std_error);
        if (crossing) t.add(s.crossing_prob[j].value).add(s.crossing_prob[j].std_error);
      }
    }
    std::vector<Artifact> out{{"sweep.csv", t.str()}};
    if (critical) {
      CsvTable ct({"family", "r_hat", "std_error", "lower_bound", "upper_bound", "bounds_verdict"});
      for (std::size_t i = 0; i < fams.size(); ++i) {
        const auto r = critical_radius(fams[i].spec, w, reps, tol, stream.derive(100 + i));
        const auto b = check_percolation_bounds(r.value, intensity(fams[i].spec, w.dim()).value, w.dim());
        ct.row().add(fams[i].label).add(r.value).add(r.std_error).add(b.lower).add(b.upper).add(to_string(b.verdict));
      }
      out.push_back({"critical.csv", ct.str()});
    }
    if (want_plot) {
      LinePlot p{"Mean fractions in the two largest components", "r", "fraction", {}};
      for (std::size_t i = 0; i < fams.size(); ++i) {
        p.series.push_back({fams[i].label + " largest", radii, values(sweeps[i].largest_fraction)});
        p.series.push_back({fams[i].label + " second", radii, values(sweeps[i].second_fraction)});
      }
      out.push_back(plot("sweep.svg", p));
    }
    return out;
  };
}

inline LevelDirection read_direction(Config& c) {
  const std::string s = c.get_string("experiment.direction", "min_above");
  if (s == "min_above") return LevelDirection::min_above;
  if (s == "max_below") return LevelDirection::max_below;
  throw config_error(c.origin_of("experiment.direction"), "key 'experiment.direction': expected min_above or max_below");
}

inline Runner coverage_experiment(Config& c) {
  std::vector<Family> fams{read_generator(c, "generator")};
  if (c.has_section("generator2")) fams.push_back(read_generator(c, "generator2", std::nullopt));
  const Window w = read_window(c, 10, Metric::periodic);
  const double r = c.get_real("experiment.radius", 0.5);
  require(r >= 0 && (w.metric() == Metric::euclidean || r < w.min_side() / 2), c, "experiment.radius",
          "must be >= 0 and below half the window side on a torus");
  const int k_max = static_cast<int>(c.get_int("experiment.k_max", 5));
  require(k_max >= 1, c, "experiment.k_max", "must be >= 1");
  const std::size_t grid_n = positive_count(c, "experiment.grid_n", 100);
  const auto levels = c.get_reals("experiment.levels", "");
  for (double a : levels) require(a > 0, c, "experiment.levels", "levels must be positive");
  const auto h = checked(c, "experiment.response",
                         [&] { return parse_response(c.get_string("experiment.response", "exponential(1)")); });
  checked(c, "experiment.response", [&] {
    h.require_integrable(w.dim());
    return 0;
  });
  const LevelDirection dir = read_direction(c);
  const std::size_t reps = positive_count(c, "run.replications", 20);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    std::vector<std::vector<EstimateWithError>> curves;
    for (std::size_t i = 0; i < fams.size(); ++i)
      curves.push_back(k_covered_volume_curve(fams[i].spec, w, r, k_max, grid_n, reps, stream.derive(i)));
    std::vector<std::string> header{"k"};
    for (const auto& f : fams) header.push_back(f.label + "_volume"), header.push_back(f.label + "_std_error");
    CsvTable t(header);
    for (int k = 1; k <= k_max; ++k) {
      t.row().add(k);
      for (const auto& cv : curves) t.add(cv[static_cast<std::size_t>(k - 1)].value).add(cv[static_cast<std::size_t>(k - 1)].std_error);
    }
    std::vector<Artifact> out{{"coverage.csv", t.str()}};
    if (fams.size() == 2) {
      std::vector<double> diff, band;
      for (int k = 0; k < k_max; ++k) {
        diff.push_back(curves[0][k].value - curves[1][k].value);
        band.push_back(2 * std::hypot(curves[0][k].std_error, curves[1][k].std_error));
      }
      const auto k0 = first_sign_flip(diff, band);
      const auto la = ball_count_law(fams[0].spec, r, w.dim()), lb = ball_count_law(fams[1].spec, r, w.dim());
      CsvTable x({"empirical_k0", "analytic_k0"});
      x.row();
      if (k0) x.add(*k0);
      else x.blank();
      std::optional<int> ak0;
      if (la && lb) ak0 = analytic_coverage_crossing(*la, *lb, k_max);
      if (ak0) x.add(*ak0);
      else x.blank();
      out.push_back({"crossing.csv", x.str()});
    }
    if (!levels.empty()) {
      CsvTable lt({"level", "bound", "best_s", "bound_finite", "empirical", "empirical_std_error"});
      const double lambda = intensity(fams[0].spec, w.dim()).value;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto b = level_exceedance_bound(lambda, h, levels[i], dir, w.dim());
        const auto e = exceedance_frequency(fams[0].spec, w, h, levels[i], dir, reps, stream.derive(200 + i));
        lt.row().add(levels[i]).add(b.value).add(b.best_s).add(b.finite).add(e.value).add(e.std_error);
      }
      out.push_back({"levels.csv", lt.str()});
    }
    if (want_plot) {
      LinePlot p{"k-covered volume", "k", "volume", {}, false, true};
      std::vector<double> ks;
      for (int k = 1; k <= k_max; ++k) ks.push_back(k);
      for (std::size_t i = 0; i < fams.size(); ++i) p.series.push_back({fams[i].label, ks, values(curves[i])});
      out.push_back(plot("coverage.svg", p));
    }
    return out;
  };
}

inline Runner sinr_experiment(Config& c) {
  const auto gen = read_generator(c, "generator");
  const Window w = read_window(c, 10, Metric::periodic);
  SinrParams base;
  base.power = c.get_real("experiment.power", 1);
  base.noise = c.get_real("experiment.noise", 0.1);
  base.threshold = c.get_real("experiment.threshold", 1);
  base.attenuation = checked(c, "experiment.attenuation",
                             [&] { return parse_response(c.get_string("experiment.attenuation", "exponential(1)")); });
  const auto gammas = c.get_reals("experiment.gammas", "0,0.005,0.01,0.02,0.05,0.1");
  require_grid(c, "experiment.gammas", gammas, INFINITY);
  checked(c, "experiment.power", [&] {
    base.validate(w.dim());
    return 0;
  });
  const double gilbert_r = base.noise_range() / 2;
  const std::size_t reps = positive_count(c, "run.replications", 20);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    std::vector<std::vector<double>> edges(gammas.size()), largest(gammas.size());
    std::vector<double> gilbert_edges;
    const bool reference = std::isfinite(gilbert_r) && (w.metric() == Metric::euclidean || 4 * gilbert_r < w.min_side());
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto p = sample(gen.spec, w, stream.derive(rep));
      const double n = std::max<double>(1, static_cast<double>(p.size()));
      for (std::size_t j = 0; j < gammas.size(); ++j) {
        SinrParams sp = base;
        sp.gamma = gammas[j];
        const auto g = sinr_graph(p, p, sp);
        edges[j].push_back(static_cast<double>(g.edges.size()));
        const auto comp = components(g);
        largest[j].push_back(comp.empty() ? 0.0 : static_cast<double>(comp[0]) / n);
      }
      if (reference) gilbert_edges.push_back(static_cast<double>(gilbert_graph(p, gilbert_r).edges.size()));
    }
    CsvTable t({"gamma", "mean_edges", "edges_std_error", "largest_fraction", "largest_fraction_std_error"});
    std::vector<double> mean_edges;
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      const auto e = summarize(edges[j]), l = summarize(largest[j]);
      mean_edges.push_back(e.value);
      t.row().add(gammas[j]).add(e.value).add(e.std_error).add(l.value).add(l.std_error);
    }
    std::vector<Artifact> out{{"sinr.csv", t.str()}};
    CsvTable ref({"noise_range", "gilbert_radius", "gilbert_mean_edges", "gilbert_edges_std_error"});
    ref.row().add(base.noise_range()).add(gilbert_r);
    if (reference) {
      const auto e = summarize(gilbert_edges);
      ref.add(e.value).add(e.std_error);
    } else {
      ref.blank().blank();
    }
    out.push_back({"sinr_reference.csv", ref.str()});
    if (want_plot) out.push_back(plot("sinr.svg", {"SINR graph edges", "gamma", "mean edges", {{gen.label, gammas, mean_edges}}}));
    return out;
  };
}

inline Runner graph_experiment(Config& c) {
  const auto gen = read_generator(c, "generator");
  const std::size_t dim = read_dim(c);
  const auto rule = read_radius_rule(c);
  const auto ns = read_n_list(c, "10,100,1000");
  require(!ns.empty(), c, "experiment.n_list", "must not be empty");
  const int k = static_cast<int>(c.get_int("experiment.k", 2));
  require(k >= 1, c, "experiment.k", "must be >= 1");
  const std::size_t exact_limit = static_cast<std::size_t>(c.get_int("experiment.exact_limit", kDefaultExactChromaticLimit));
  const std::size_t reps = positive_count(c, "run.replications", 50);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    const auto rows = scaling_experiment(gen.spec, rule, ns, k, reps, stream, dim, exact_limit);
    CsvTable t({"n", "radius", "clique", "clique_std_error", "max_degree", "max_degree_std_error", "chromatic",
                "chromatic_std_error", "edges", "edges_std_error", "p_clique_below_k", "chromatic_exact"});
    std::vector<double> xs, clique, chrom, degree;
    for (const auto& r : rows) {
      t.row().add(static_cast<long long>(r.n)).add(r.radius).add(r.clique.value).add(r.clique.std_error);
      t.add(r.max_degree.value).add(r.max_degree.std_error).add(r.chromatic.value).add(r.chromatic.std_error);
      t.add(r.edges.value).add(r.edges.std_error).add(r.p_clique_below_k).add(r.chromatic_exact);
      xs.push_back(static_cast<double>(r.n));
      clique.push_back(r.clique.value);
      chrom.push_back(r.chromatic.value);
      degree.push_back(r.max_degree.value);
    }
    std::vector<Artifact> out{{"graph.csv", t.str()}};
    if (want_plot)
      out.push_back(plot("graph.svg", {"Clique, chromatic number and maximum degree", "n", "mean",
                                       {{"clique", xs, clique}, {"chromatic", xs, chrom}, {"max degree", xs, degree}},
                                       true, false}));
    return out;
  };
}

inline Runner complex_experiment(Config& c) {
  const auto gen = read_generator(c, "generator");
  const Window w = read_window(c, 5, Metric::euclidean);
  const double r = c.get_real("experiment.radius", 0.5);
  require(r >= 0, c, "experiment.radius", "must be >= 0");
  const int max_dim = static_cast<int>(c.get_int("experiment.max_dim", 2));
  require(max_dim >= 0 && max_dim <= kMaxComplexDim, c, "experiment.max_dim", "must be in [0, 4]");
  const std::string rule = c.get_string("experiment.rule", "cech");
  require(rule == "cech" || rule == "rips", c, "experiment.rule", "expected cech or rips");
  if (rule == "cech") require(w.metric() == Metric::euclidean, c, "window.metric", "Cech complexes need a Euclidean window");
  const auto ns = read_n_list(c, "");
  const auto radius_rule = read_radius_rule(c);
  const int k = static_cast<int>(c.get_int("experiment.k", 1));
  require(k >= 0 && k <= 2, c, "experiment.k", "must be in [0, 2]");
  const std::size_t reps = positive_count(c, "run.replications", 20);
  const RandomStream stream(read_seed(c));
  return [=](bool want_plot) {
    const auto p = sample(gen.spec, w, stream.derive(0));
    const auto cx = rule == "cech" ? cech_complex(p, r, max_dim) : vietoris_rips(p, r, max_dim);
    CsvTable faces({"dim", "v0", "v1", "v2", "v3", "v4"});
    for (std::size_t d = 0; d < cx.faces.size(); ++d)
      for (const auto& f : cx.faces[d]) {
        faces.row().add(d);
        for (std::size_t j = 0; j <= static_cast<std::size_t>(kMaxComplexDim); ++j) {
          if (j < f.size()) faces.add(static_cast<unsigned long>(f[j]));
          else faces.blank();
        }
      }
    const auto betti = betti_numbers(cx);
    const auto counts = simplex_counts(cx);
    CsvTable bt({"dim", "faces", "betti"});
    for (std::size_t d = 0; d < counts.size(); ++d) {
      bt.row().add(d).add(counts[d]);
      if (d < betti.size()) bt.add(betti[d]);
      else bt.blank();
    }
    CsvTable st({"vertices", "euler_characteristic", "complete"});
    st.row().add(p.size()).add(euler_characteristic(cx)).add(cx.complete);
    std::vector<Artifact> out{{"faces.csv", faces.str()}, {"betti.csv", bt.str()}, {"complex_summary.csv", st.str()}};
    std::vector<BettiScalingRow> rows;
    if (!ns.empty()) {
      rows = betti_scaling_experiment(gen.spec, radius_rule, ns, k, reps, stream.derive(1), w.dim());
      CsvTable sc({"n", "radius", "mean_betti", "std_error", "p_zero"});
      for (const auto& row : rows)
        sc.row().add(static_cast<long long>(row.n)).add(row.radius).add(row.betti.value).add(row.betti.std_error).add(row.p_zero);
      out.push_back({"scaling.csv", sc.str()});
    }
    if (want_plot) {
      std::vector<double> dims, s, b;
      for (std::size_t d = 0; d < counts.size(); ++d) {
        dims.push_back(static_cast<double>(d));
        s.push_back(static_cast<double>(counts[d]));
        b.push_back(d < betti.size() ? static_cast<double>(betti[d]) : NAN);
      }
      out.push_back(plot("complex.svg", {"Face counts and Betti numbers", "dimension", "count", {{"faces", dims, s}, {"betti", dims, b}}}));
      if (!rows.empty()) {
        std::vector<double> xs, ys;
        for (const auto& row : rows) xs.push_back(static_cast<double>(row.n)), ys.push_back(row.p_zero);
        out.push_back(plot("scaling.svg", {"P(beta_k = 0)", "n", "probability", {{gen.label, xs, ys}}, true, false}));
      }
    }
    return out;
  };
}

inline Runner kernel_chain_experiment(Config& c) {
  const double lambda = c.get_real("experiment.lambda", 1);
  const long long n = c.get_int("experiment.n", 6), m = c.get_int("experiment.m", 4);
  const auto r_list = c.get_ints("experiment.r", "2,4");
  const double r1 = c.get_real("experiment.r1", 1), r2 = c.get_real("experiment.r2", 2);
  const auto weights = c.get_reals("experiment.mixture_weights", "0.5,0.5");
  const auto ps = c.get_reals("experiment.mixture_p", "1,0.3333333333333333");
  const std::vector<std::int64_t> rs(r_list.begin(), r_list.end());
  const auto sub = checked(c, "experiment.r", [&] { return sub_poisson_chain(lambda, n, m, rs); });
  const auto super = checked(c, "experiment.mixture_p", [&] { return super_poisson_chain(lambda, r1, r2, weights, ps); });
  return [=](bool want_plot) {
    CsvTable t({"chain", "link", "left", "right", "verdict", "min_slack", "witness"});
    auto emit = [&](const char* name, const std::vector<CountDistribution>& chain) {
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const auto v = check_cx(chain[i], chain[i + 1]);
        t.row().add(name).add(i).add(describe(chain[i])).add(describe(chain[i + 1])).add(to_string(v.outcome));
        if (v.outcome == CxOutcome::means_differ) t.blank();
        else t.add(v.min_slack);
        if (v.outcome == CxOutcome::fails) t.add(v.witness);
        else t.blank();
      }
    };
    emit("sub_poisson", sub);
    emit("super_poisson", super);
    std::vector<Artifact> out{{"chain.csv", t.str()}};
    if (want_plot) {
      for (const auto& [file, chain] : {std::pair{"sub_chain.svg", &sub}, std::pair{"super_chain.svg", &super}}) {
        LinePlot p{"Stop-loss transforms", "a", "E(X - a)+", {}, false, true};
        for (const auto& d : *chain) {
          Series s{describe(d), {}, {}};
          for (int i = 0; i <= 80; ++i) {
            s.x.push_back(0.1 * i);
            s.y.push_back(stop_loss(d, 0.1 * i));
          }
          p.series.push_back(std::move(s));
        }
        out.push_back(plot(file, p));
      }
    }
    return out;
  };
}

}  // namespace detail

inline const std::map<std::string, Runner (*)(Config&)>& experiments() {
  static const std::map<std::string, Runner (*)(Config&)> table = {
      {"sample", detail::sample_experiment},         {"summary", detail::summary_experiment},
      {"compare", detail::compare_experiment},       {"percolation", detail::percolation_experiment},
      {"coverage", detail::coverage_experiment},     {"sinr", detail::sinr_experiment},
      {"graph", detail::graph_experiment},           {"complex", detail::complex_experiment},
      {"kernel_chain", detail::kernel_chain_experiment},
  };
  return table;
}

/// Resolves and validates the whole configuration, then runs. The manifest
/// is the resolved configuration (defaults included) and reproduces the run
/// when passed back as --config.
inline std::vector<Artifact> execute(const std::string& experiment, Config& c, bool want_plot,
                                     std::ostream& log = std::cerr) {
  const auto it = experiments().find(experiment);
  if (it == experiments().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  const std::string named = c.get_string("run.experiment", experiment);
  if (named != experiment)
    throw ConfigError(c.origin_of("run.experiment") + ": config is for experiment '" + named + "', not '" + experiment + "'");
  if (c.has("run.version") && c.get_string("run.version") != kVersion)
    log << "warning: config written by ppclust " << c.get_string("run.version") << ", running " << kVersion << "\n";
  c.set("run.version", kVersion, "tool");
  c.get_string("run.version");
  detail::read_seed(c);  // accepted everywhere, even by deterministic experiments
  const Runner run = it->second(c);
  c.reject_unused();
  const std::string manifest = c.resolved_text("# ppclust manifest\n");
  auto out = run(want_plot);
  out.insert(out.begin(), Artifact{"manifest.ini", manifest});
  return out;
}

inline void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  std::filesystem::create_directories(dir);
  for (const auto& a : artifacts) {
    std::ofstream f(dir / a.name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (dir / a.name).string());
    f << a.content;
    if (!f) throw Error("write failed for " + (dir / a.name).string());
  }
}

}  // namespace ppclust::cli

#endif  // PPCLUST_EXPERIMENTS_HPP
