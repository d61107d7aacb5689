#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "axisforge/cli/cli.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/probekit/probe_io.hpp"
#include "axisforge/repstore/axis_file.hpp"
#include "axisforge/repstore/binio.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"
#include "support/helpers.hpp"

using namespace axisforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return repstore::read_file(p); }

// Two-layer planted CSV: column 0 carries the class at both layers.
void write_planted_csv(const fs::path& path, std::size_t n_per_class) {
  numkit::Rng rng(17);
  std::ostringstream s;
  s << "id,word,static_score,label,group,layer,x0,x1,x2\n";
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const bool high = i < n_per_class;
    for (int l = 0; l < 2; ++l) {
      s << "w" << i << "," << (high ? "rock" : "idea") << "," << (high ? 4.5 : 1.5) << ","
        << (high ? "high" : "low") << ",g" << (i % 3) << "," << l;
      for (int j = 0; j < 3; ++j) s << "," << rng.normal() + (j == 0 && high ? 3.0 : 0.0);
      s << "\n";
    }
  }
  repstore::atomic_write_file(path, s.str());
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_cli({"--help"}).code == 0);
  const auto none = run_cli({});
  CHECK(none.code == 1);
  CHECK(none.err.find("error") != std::string::npos);
  CHECK(run_cli({"frobnicate"}).code == 1);
}

TEST_CASE("unknown flag exits 1 and writes nothing") {
  testutil::TempDir dir("cli-bad");
  write_planted_csv(dir / "in.csv", 10);
  const auto r = run_cli({"ingest-csv", (dir / "in.csv").string(), (dir / "out.hsd").string(), "--bogus"});
  CHECK(r.code == 1);
  CHECK(!fs::exists(dir / "out.hsd"));
  CHECK(!fs::exists(dir / "out.hsd.manifest.json"));
}

TEST_CASE("missing input is a data error") {
  testutil::TempDir dir("cli-missing");
  const auto r = run_cli({"diffmean", (dir / "nope.hsd").string(), (dir / "o.csv").string()});
  CHECK(r.code == 2);
  CHECK(!fs::exists(dir / "o.csv"));
}

TEST_CASE("dump to axis to curves pipeline") {
  testutil::TempDir dir("cli-pipe");
  const auto p = [&](const char* n) { return (dir / n).string(); };
  write_planted_csv(dir / "in.csv", 40);

  REQUIRE(run_cli({"ingest-csv", p("in.csv"), p("d.hsd"), "--dtype", "f64"}).code == 0);
  const auto dump = repstore::read_hsd(dir / "d.hsd");
  CHECK(dump.n_layers() == 2);
  CHECK(dump.n_samples() == 80);
  CHECK(dump.meta()[0].word == "rock");

  REQUIRE(run_cli({"diffmean", p("d.hsd"), p("dm.csv")}).code == 0);
  CHECK(slurp(dir / "dm.csv").rfind("layer,layer_norm,n_high,n_low,d0,d1,d2\n", 0) == 0);

  REQUIRE(run_cli({"axis", p("d.hsd"), p("a.cax"), "--k", "2"}).code == 0);
  const auto ax = repstore::read_axis(dir / "a.cax");
  CHECK(ax.k() == 2);
  CHECK(ax.basis(0, 0) > 0.9);

  REQUIRE(run_cli({"project", p("d.hsd"), p("a.cax"), p("s.csv")}).code == 0);
  REQUIRE(run_cli({"auroc", p("d.hsd"), p("a.cax"), p("au.csv")}).code == 0);
  const auto direct = repstore::read_curves_csv(dir / "au.csv");
  REQUIRE(direct.size() == 1);
  CHECK(direct[0].values.size() == 2);
  for (double v : direct[0].values) CHECK(v >= 0.9);

  REQUIRE(run_cli({"auroc", "--scores", p("s.csv"), p("au2.csv")}).code == 0);
  CHECK(repstore::read_curves_csv(dir / "au2.csv")[0].values == direct[0].values);

  REQUIRE(run_cli({"auroc", p("d.hsd"), p("a.cax"), p("au1.csv"), "--layer", "1"}).code == 0);
  const auto single = repstore::read_curves_csv(dir / "au1.csv");
  CHECK(single[0].first_layer == 1);
  CHECK(single[0].values == std::vector<double>{direct[0].values[1]});
  CHECK(run_cli({"auroc", p("d.hsd"), p("a.cax"), p("bad.csv"), "--layer", "2"}).code == 2);

  const std::vector<std::string> probe{"--hidden", "8,4", "--epochs", "3", "--lr", "1e-3", "--batch", "10"};
  auto args = std::vector<std::string>{"probe-train", p("d.hsd"), p("probes")};
  args.insert(args.end(), probe.begin(), probe.end());
  REQUIRE(run_cli(args).code == 0);
  CHECK(fs::exists(dir / "probes" / "probe_l0.prb"));
  CHECK(probekit::read_probe(dir / "probes" / "probe_l1.prb").config.seed == 1);

  args = {"probe-eval", p("d.hsd"), p("pe.csv"), "--protocol", "holdout_80_20"};
  args.insert(args.end(), probe.begin(), probe.end());
  REQUIRE(run_cli(args).code == 0);
  CHECK(repstore::read_curves_csv(dir / "pe.csv")[0].metric == repstore::Metric::kPearson);

  REQUIRE(run_cli({"delta", p("probes"), p("d.hsd"), p("de.csv")}).code == 0);
  CHECK(repstore::read_curves_csv(dir / "de.csv").size() == 2);

  REQUIRE(run_cli({"report", p("rep.csv"), p("au.csv"), p("de.csv")}).code == 0);
  const auto rep = slurp(dir / "rep.csv");
  CHECK(rep.rfind("source,layer,layer_norm,metric,value\nau,0,", 0) == 0);
  CHECK(rep.find("de,1,1,delta_low,") != std::string::npos);
}

TEST_CASE("manifests record inputs and reruns are byte identical") {
  testutil::TempDir dir("cli-manifest");
  const auto p = [&](const char* n) { return (dir / n).string(); };
  write_planted_csv(dir / "in.csv", 20);
  REQUIRE(run_cli({"ingest-csv", p("in.csv"), p("d.hsd")}).code == 0);
  REQUIRE(run_cli({"--threads", "2", "axis", p("d.hsd"), p("a.cax")}).code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "a.cax.manifest.json"));
  CHECK(m["subcommand"] == "axis");
  CHECK(m["threads"] == 2);
  REQUIRE(m["inputs"].size() == 1);
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(m["parameters"]["k"] == 1);

  const auto first = slurp(dir / "a.cax");
  REQUIRE(run_cli({"--threads", "1", "axis", p("d.hsd"), p("a.cax")}).code == 0);
  CHECK(slurp(dir / "a.cax") == first);
  const auto hsd = slurp(dir / "d.hsd");
  REQUIRE(run_cli({"ingest-csv", p("in.csv"), p("d.hsd")}).code == 0);
  CHECK(slurp(dir / "d.hsd") == hsd);
}

TEST_CASE("toy train, export and sweep") {
  testutil::TempDir dir("cli-toy");
  const auto p = [&](const char* n) { return (dir / n).string(); };
  REQUIRE(run_cli({"toy-train", p("m.toy"), "--steps", "3", "--batch", "2", "--corpus-size", "8"}).code == 0);
  REQUIRE(run_cli({"toy-export", p("m.toy"), p("t.hsd"), "--n", "12"}).code == 0);
  CHECK(repstore::read_hsd(dir / "t.hsd").n_layers() == 4);
  REQUIRE(run_cli({"axis", p("t.hsd"), p("t.cax")}).code == 0);
  CHECK(run_cli({"steer-sweep", p("m.toy"), p("t.cax"), p("sw.csv")}).code == 1);  // --layer required
  REQUIRE(run_cli({"steer-sweep", p("m.toy"), p("t.cax"), p("sw.csv"), "--layer", "3", "--prompts", "3", "--alphas",
               "-1,0,1"})
              .code == 0);
  const auto csv = slurp(dir / "sw.csv");
  CHECK(csv.rfind("alpha,mean_projection,register_mass,n\n-1,", 0) == 0);
  // Alphas are sorted on the way in; duplicates remain an error.
  REQUIRE(run_cli({"steer-sweep", p("m.toy"), p("t.cax"), p("sw2.csv"), "--layer", "3", "--prompts", "2", "--alphas",
                   "1,0"})
              .code == 0);
  CHECK(slurp(dir / "sw2.csv").rfind("alpha,mean_projection,register_mass,n\n0,", 0) == 0);
  CHECK(run_cli({"steer-sweep", p("m.toy"), p("t.cax"), p("sw4.csv"), "--layer", "3", "--alphas", "1,1"}).code == 2);
  CHECK(run_cli({"steer-sweep", p("m.toy"), p("t.cax"), p("sw3.csv"), "--layer", "4"}).code == 2);
}
