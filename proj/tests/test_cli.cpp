#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "cli.hpp"

using namespace ppclust;
using namespace ppclust::cli;
namespace fs = std::filesystem;

namespace {

std::vector<Artifact> run(const std::string& experiment, const std::string& text, bool plot = false) {
  Config c = Config::parse(text, "test.ini");
  std::ostringstream log;
  return execute(experiment, c, plot, log);
}

std::string content(const std::vector<Artifact>& a, const std::string& name) {
  for (const auto& x : a)
    if (x.name == name) return x.content;
  FAIL("missing artifact " << name);
  return {};
}

std::string error_of(const std::string& experiment, const std::string& text) {
  try {
    run(experiment, text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ppclust_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

int call(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ppclust");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

const char* kThomas = R"(
[generator]
family = thomas
parent_intensity = 0.5
mean_cluster_size = 4
sigma = 0.2
[window]
side = 8
[experiment]
radii = 0.25,0.5,1
scales = 0.5,1
[run]
replications = 6
seed = 7
)";

}  // namespace

TEST_CASE("config parsing", "[cli]") {
  const auto c = Config::parse("# x\n[a]\nb = 1 \n; y\n[c]\nd=two words\n", "f.ini");
  CHECK(c.has("a.b"));
  CHECK(c.has_section("c"));
  CHECK_FALSE(c.has_section("b"));
  Config m = c;
  CHECK(m.get_int("a.b") == 1);
  CHECK(m.get_string("c.d") == "two words");
  CHECK(m.get_real("c.e", 2.5) == 2.5);

  CHECK_THROWS_WITH(Config::parse("b = 1\n", "f.ini"), Catch::Matchers::ContainsSubstring("f.ini:1"));
  CHECK_THROWS_WITH(Config::parse("[a]\nb=1\nb=2\n", "f.ini"), Catch::Matchers::ContainsSubstring("f.ini:3"));
  CHECK_THROWS_AS(Config::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a]\nno value\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a b]\n"), ConfigError);

  CHECK(Config::parse_real_list("0.3:0.8:0.1").size() == 6);
  CHECK(Config::parse_real_list("1, 2,3") == std::vector<double>{1, 2, 3});
  CHECK(Config::parse_real_list(" ").empty());
  CHECK_THROWS_AS(Config::parse_real_list("1:0:1"), InvalidArgument);
}

TEST_CASE("csv writer", "[cli]") {
  CsvTable t({"a", "b", "c"});
  t.row().add(0.1).add(std::string("x,y")).add(3);
  t.row().add(true).blank().add(std::string("say \"hi\""));
  CHECK(t.str() == "a,b,c\n0.10000000000000001,\"x,y\",3\ntrue,,\"say \"\"hi\"\"\"\n");
  CsvTable bad({"a", "b"});
  bad.row().add(1);
  CHECK_THROWS_AS(bad.str(), Error);
}

TEST_CASE("response parsing", "[cli]") {
  CHECK_NOTHROW(cli::detail::parse_response("exponential(2)"));
  CHECK_NOTHROW(cli::detail::parse_response(" power_law(3, 0.5) "));
  CHECK_NOTHROW(cli::detail::parse_response("indicator_ball(1)"));
  CHECK_THROWS_AS(cli::detail::parse_response("gaussian(1)"), InvalidArgument);
  CHECK_THROWS_AS(cli::detail::parse_response("exponential"), InvalidArgument);
  CHECK_THROWS_AS(cli::detail::parse_response("power_law(3)"), InvalidArgument);
}

TEST_CASE("every experiment runs with its defaults", "[cli]") {
  const std::map<std::string, std::string> minimal = {
      {"sample", "[window]\nside = 4\n"},
      {"summary", "[window]\nside = 6\n[experiment]\nradii = 0.5,1\n[run]\nreplications = 3\n"},
      {"compare", "[window]\nside = 6\n[run]\nreplications = 5\n"},
      {"percolation", "[window]\nside = 8\n[experiment]\nradii = 0.4,0.8\n[run]\nreplications = 3\n"},
      {"coverage", "[experiment]\ngrid_n = 20\nlevels = 1\n[run]\nreplications = 2\n"},
      {"sinr", "[window]\nside = 5\n[run]\nreplications = 2\n"},
      {"graph", "[experiment]\nn_list = 10,50\n[run]\nreplications = 3\n"},
      {"complex", "[generator]\nfamily = binomial\nn = 30\n[window]\nside = 3\n"},
      {"kernel_chain", ""},
  };
  REQUIRE(minimal.size() == experiments().size());
  for (const auto& [name, text] : minimal) {
    INFO(name);
    const auto a = run(name, text, true);
    REQUIRE(a.size() >= 2);
    CHECK(a[0].name == "manifest.ini");
    CHECK(a[0].content.rfind("# ppclust manifest\n", 0) == 0);
    CHECK(a[0].content.find("experiment = " + name) != std::string::npos);
    bool svg = false;
    for (const auto& x : a) {
      if (x.name.ends_with(".svg")) {
        svg = true;
        CHECK(x.content.rfind("<svg", 0) == 0);
      }
      if (x.name.ends_with(".csv")) CHECK(x.content.find('\r') == std::string::npos);
    }
    CHECK(svg);
  }
}

TEST_CASE("runs are reproducible and independent of the thread count", "[cli]") {
  const unsigned saved = thread_count();
  set_thread_count(1);
  const auto one = run("summary", kThomas);
  const auto again = run("summary", kThomas);
  set_thread_count(8);
  const auto eight = run("summary", kThomas);
  set_thread_count(saved);
  REQUIRE(one.size() == eight.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].content == again[i].content);
    CHECK(one[i].content == eight[i].content);
  }
}

TEST_CASE("seed changes the output", "[cli]") {
  std::string text = kThomas;
  const auto a = run("summary", text);
  text.replace(text.find("seed = 7"), 8, "seed = 8");
  const auto b = run("summary", text);
  CHECK(content(a, "k_function.csv") != content(b, "k_function.csv"));
}

TEST_CASE("the manifest reproduces the run", "[cli]") {
  for (const std::string name : {"summary", "percolation", "kernel_chain"}) {
    const std::string text = name == "percolation" ? "[window]\nside = 8\n[experiment]\nradii = 0.4,0.8\n[run]\nreplications = 3\n"
                           : name == "summary"     ? std::string(kThomas)
                                                   : std::string();
    const auto first = run(name, text);
    const auto second = run(name, first[0].content);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].content == second[i].content);
  }
}

TEST_CASE("configuration errors name the key and line", "[cli]") {
  const std::string unknown = error_of("sample", "[window]\nside = 4\n[generator]\nintensty = 2\n");
  CHECK_THAT(unknown, Catch::Matchers::ContainsSubstring("generator.intensty"));
  CHECK_THAT(unknown, Catch::Matchers::ContainsSubstring("test.ini:4"));

  const std::string bad = error_of("sample", "[generator]\nintensity = lots\n");
  CHECK_THAT(bad, Catch::Matchers::ContainsSubstring("generator.intensity"));
  CHECK_THAT(bad, Catch::Matchers::ContainsSubstring("test.ini:2"));

  const std::string invalid = error_of("sample", "[generator]\nintensity = -1\n");
  CHECK_THAT(invalid, Catch::Matchers::ContainsSubstring("test.ini:2"));

  CHECK_THAT(error_of("sample", "[generator]\nfamily = strauss\n"), Catch::Matchers::ContainsSubstring("strauss"));
  CHECK_THAT(error_of("summary", "[experiment]\nradii = 0.5,0.25\n"), Catch::Matchers::ContainsSubstring("increase"));
  CHECK_THAT(error_of("summary", "[window]\nmetric = euclidean\n"), Catch::Matchers::ContainsSubstring("periodic"));
  CHECK_THAT(error_of("sample", "[run]\nexperiment = graph\n"), Catch::Matchers::ContainsSubstring("graph"));
  CHECK_THAT(error_of("compare", "[generator2]\nfamily = poisson\n"), Catch::Matchers::ContainsSubstring("generator2"));
  CHECK_THAT(error_of("compare", "[experiment]\nstatistic = voids\n"), Catch::Matchers::ContainsSubstring("generator2"));
  CHECK_THAT(error_of("compare", "[experiment]\nstatistic = voids\n[generator2]\nfamily = poisson\nintensity = 2\n"),
             Catch::Matchers::ContainsSubstring("1%"));
  CHECK_THAT(error_of("percolation", "[experiment]\ncritical = true\n"), Catch::Matchers::ContainsSubstring("Euclidean"));
  CHECK_THAT(error_of("complex", "[window]\nmetric = periodic\n"), Catch::Matchers::ContainsSubstring("Euclidean"));
  CHECK_THAT(error_of("nonsense", ""), Catch::Matchers::ContainsSubstring("nonsense"));
}

TEST_CASE("command line", "[cli]") {
  TempDir dir;
  const auto cfg = dir.write("run.ini", "[window]\nside = 4\n[generator]\nintensity = 2\n");
  const auto out = dir.path / "out";
  std::string err;

  CHECK(call({"sample", "--config", cfg.string(), "--out", out.string(), "--seed", "3", "--threads", "2", "--plot"}) == 0);
  CHECK(fs::exists(out / "points.csv"));
  CHECK(fs::exists(out / "manifest.ini"));
  std::ifstream mf(out / "manifest.ini");
  const std::string manifest((std::istreambuf_iterator<char>(mf)), {});
  CHECK(manifest.find("seed = 3") != std::string::npos);

  CHECK(call({"sample", "--config", cfg.string(), "--out", out.string(), "--generator.intensity", "0.5",
              "--window.side=3"}) == 0);
  std::ifstream mf2(out / "manifest.ini");
  const std::string manifest2((std::istreambuf_iterator<char>(mf2)), {});
  CHECK(manifest2.find("intensity = 0.5") != std::string::npos);
  CHECK(manifest2.find("side = 3") != std::string::npos);

  // the manifest is itself a config reproducing the run
  const auto out2 = dir.path / "again";
  CHECK(call({"sample", "--config", (out / "manifest.ini").string(), "--out", out2.string()}) == 0);
  std::ifstream p1(out / "points.csv"), p2(out2 / "points.csv");
  CHECK(std::string((std::istreambuf_iterator<char>(p1)), {}) == std::string((std::istreambuf_iterator<char>(p2)), {}));

  CHECK(call({"sample", "--config", cfg.string(), "--out", out.string(), "--generator.bogus", "1"}, &err) == 2);
  CHECK_THAT(err, Catch::Matchers::ContainsSubstring("generator.bogus"));
  CHECK(call({"sample", "--config", (dir.path / "missing.ini").string()}, &err) == 2);
  CHECK(call({"sample"}, &err) == 2);
  CHECK(call({"sample", "--config", cfg.string(), "--bogus"}, &err) == 2);
  CHECK(call({"unknown", "--config", cfg.string(), "--out", out.string()}, &err) == 2);
  CHECK(call({"sample", "--config", cfg.string(), "--generator.intensity"}, &err) == 2);
  CHECK(call({"--help"}) == 0);

  // a valid config that fails at run time: hard-core lattice cell count overflow
  const auto huge = dir.write("huge.ini", "[window]\nside = 1e9\n[generator]\nfamily = square_lattice\n");
  CHECK(call({"sample", "--config", huge.string(), "--out", out.string()}, &err) == 3);
}
