#include "doctest.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bbmflow/ensemble_file.hpp"
#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using bbmflow::cli::dispatch;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("bbmflow_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bbmflow");
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

double value_of(const std::string& path) { return nlohmann::json::parse(slurp(path)).at("value").get<double>(); }

}  // namespace

TEST_CASE("sample, evolve, distance pipeline") {
  TempDir dir;
  REQUIRE(run({"sample", "--measure", "gaussian-l2", "--modes", "16", "--count", "24", "--seed", "42", "--out", dir / "a.bbme"}).code == 0);
  REQUIRE(run({"sample", "--measure", "gaussian-perturbed", "--v", "0.2", "--modes", "16", "--count", "24", "--seed", "42", "--out", dir / "b.bbme"}).code == 0);
  const auto a = bbmflow::read_ensemble(dir / "a.bbme");
  CHECK(a.size() == 24);
  CHECK(a.max_mode() == 16);
  CHECK(a.samples[3] == bbmflow::sample_gaussian_one(bbmflow::MeasureSpec::gaussian_l2(16), 42, 3));

  REQUIRE(run({"evolve", "--in", dir / "a.bbme", "--t", "1.0", "--dt", "1e-3", "--trunc", "16", "--out", dir / "a_t.bbme"}).code == 0);
  REQUIRE(run({"evolve", "--in", dir / "b.bbme", "--t", "1.0", "--dt", "1e-3", "--trunc", "16", "--out", dir / "b_t.bbme"}).code == 0);
  const auto at = bbmflow::read_ensemble(dir / "a_t.bbme");
  CHECK(at.time == 1.0);
  CHECK(at.samples[0] == bbmflow::evolve(a.samples[0], 1.0, bbmflow::EvolveParams{1e-3, 16, false}));

  for (const char* method : {"exact", "sync", "sinkhorn"})
    REQUIRE(run({"distance", "--a", dir / "a_t.bbme", "--b", dir / "b_t.bbme", "--s", "0", "--p", "2", "--method",
                 method, "--out", (dir.path / (std::string(method) + ".json")).string()})
                .code == 0);
  const double exact = value_of(dir / "exact.json");
  const double sync = value_of(dir / "sync.json");
  const double sinkhorn = value_of(dir / "sinkhorn.json");
  CHECK(exact <= sync);
  CHECK(exact <= sinkhorn * (1.0 + 1e-12));
  const auto report = nlohmann::json::parse(slurp(dir / "exact.json"));
  CHECK(report.at("schema") == 1);
  CHECK(report.at("permutation").size() == 24);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  TempDir dir;
  const char* previous = std::getenv("BBMFLOW_THREADS");
  std::string first;
  for (const char* threads : {"1", "3"}) {
    ::setenv("BBMFLOW_THREADS", threads, 1);
    REQUIRE(run({"sample", "--modes", "8", "--count", "10", "--seed", "5", "--out", dir / "s.bbme"}).code == 0);
    REQUIRE(run({"evolve", "--in", dir / "s.bbme", "--t", "0.5", "--out", dir / "t.bbme"}).code == 0);
    const std::string bytes = slurp(dir / "s.bbme") + slurp(dir / "t.bbme");
    if (first.empty())
      first = bytes;
    else
      CHECK(bytes == first);
  }
  if (previous)
    ::setenv("BBMFLOW_THREADS", previous, 1);
  else
    ::unsetenv("BBMFLOW_THREADS");
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"sample", "--modes", "4", "--count", "2", "--seed", "1", "--out", "x", "--bogus"}).code == 2);
  CHECK(run({"sample", "--modes", "4", "--count", "2", "--seed", "1"}).code == 2);
  CHECK(run({"sample", "--measure", "gaussian-perturbed", "--modes", "4", "--count", "2", "--seed", "1", "--out", "x"}).code == 2);
  CHECK(run({"sample", "--measure", "gaussian-perturbed", "--v", "-2", "--modes", "4", "--count", "2", "--seed", "1", "--out", "x"}).code == 2);
  CHECK(run({"verify", "nonsense"}).code == 2);
  CHECK(run({"verify", "continuity", "--p1", "3"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sample") != std::string::npos);
}

TEST_CASE("incompatible or broken inputs exit with 3") {
  TempDir dir;
  REQUIRE(run({"sample", "--modes", "8", "--count", "4", "--seed", "1", "--out", dir / "a.bbme"}).code == 0);
  REQUIRE(run({"sample", "--modes", "6", "--count", "4", "--seed", "1", "--out", dir / "b.bbme"}).code == 0);
  const Run mismatch = run({"distance", "--a", dir / "a.bbme", "--b", dir / "b.bbme"});
  CHECK(mismatch.code == 3);
  CHECK(mismatch.err.find("incompatible") != std::string::npos);
  CHECK(run({"evolve", "--in", dir / "a.bbme", "--t", "1", "--trunc", "9", "--out", dir / "c.bbme"}).code == 3);
  CHECK(run({"evolve", "--in", dir / "missing.bbme", "--t", "1", "--out", dir / "c.bbme"}).code == 3);
}

TEST_CASE("verify writes JSON or CSV and report converts") {
  TempDir dir;
  const std::vector<std::string> small{"--modes", "8", "--count", "24", "--dt", "0.01", "--aux-count", "5000"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), small.begin(), small.end());
    return head;
  };
  const Run verify = run(with({"verify", "moments", "--out", dir / "m.json"}));
  CHECK((verify.code == 0 || verify.code == 1));
  const auto report = nlohmann::json::parse(slurp(dir / "m.json"));
  CHECK(report.at("schema") == 1);
  CHECK(report.at("config").at("modes") == 8);
  CHECK(verify.code == (report.at("pass").get<bool>() ? 0 : 1));

  const Run csv = run({"report", "--in", dir / "m.json", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.find("# q_grid\n") != std::string::npos);
  const Run direct = run(with({"verify", "moments", "--format", "csv"}));
  CHECK(direct.out == csv.out);

  const Run failing = run({"verify", "growth", "--modes", "8", "--count", "16", "--holdout", "16", "--dt", "0.01",
                           "--t-grid", "1", "--forced-C", "1e-6"});
  CHECK(failing.code == 1);
}
