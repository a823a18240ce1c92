#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "phi/config.hpp"
#include "phi/error.hpp"

using namespace phi;

TEST_CASE("defaults carry the published operating point") {
  auto c = default_config();
  CHECK(c.min_n == 50);
  CHECK(c.harmonise.rule.cosine_min == 0.76);
  CHECK(c.harmonise.rule.ratio_min == 77);
  CHECK(c.harmonise.rule.jaccard_min == 0.36);
  CHECK(c.harmonise.rule.ensemble_min == 0.66);
  CHECK(c.em.tol == 1e-3);
  CHECK(c.em.max_iter == 100);
  CHECK(c.em.reg_covar == 1e-6);
  CHECK(c.em.prune_threshold == 0.05);
  CHECK(c.eps == 1e-6);
  CHECK(c.tiers.p_low == 70);
  CHECK(c.tiers.p_high == 90);
  CHECK(c.anchoring.peaks.bin_width == 100);
  CHECK(c.anchoring.peaks.range_max == 30000);
  CHECK(c.anchoring.peaks.sigma_bins == 4);
  CHECK(c.anchoring.peaks.prominence_frac == 0.04);
  CHECK(c.anchoring.peaks.min_position == 300);
  CHECK(c.anchoring.windows_pct == std::vector<double>{5, 10});
  CHECK(c.anchoring.n_perm == 5000);
}

TEST_CASE("INI text, overrides and relative paths") {
  const std::string ini =
      "[input]\npaths = a.csv; /abs/b.csv\n[em]\nseed = 7\n[tiers]\np_high = 95\n"
      "[anchoring]\nwindows_pct = 2.5, 5\nexogenous_peaks = 1000,2000\n[output]\ndir = out\n";
  const std::vector<std::string> sets{"em.max_iter=50", "harmonise.salt=pepper"};
  auto c = parse_config(ini, sets, "/base");
  REQUIRE(c.inputs.size() == 2);
  CHECK(c.inputs[0] == std::filesystem::path("/base/a.csv"));
  CHECK(c.inputs[1] == std::filesystem::path("/abs/b.csv"));
  CHECK(c.em.seed == 7);
  CHECK(c.em.max_iter == 50);
  CHECK(c.tiers.p_high == 95);
  CHECK(c.harmonise.salt == "pepper");
  CHECK(c.anchoring.windows_pct == std::vector<double>{2.5, 5});
  REQUIRE(c.anchoring.exogenous_peaks);
  CHECK(c.anchoring.exogenous_peaks->size() == 2);
  CHECK(c.output_dir == std::filesystem::path("/base/out"));
}

TEST_CASE("bad settings are config errors") {
  CHECK_THROWS_AS(parse_config("[em]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[em]\ntol = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[em]\ntol = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[tiers]\np_low = 95\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[em]\nprune_threshold = 0.3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("this is not ini ["), ConfigError);
  CHECK_THROWS_AS(default_config(std::vector<std::string>{"em.tol"}), ConfigError);
  CHECK_THROWS_AS(default_config(std::vector<std::string>{"anchoring.enabled=maybe"}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/phi.ini"), ConfigError);
}

TEST_CASE("the echo names every key and the hash ignores output placement") {
  auto a = default_config();
  auto b = default_config(std::vector<std::string>{"output.dir=/elsewhere", "run.threads=4"});
  CHECK(config_hash(a) == config_hash(b));
  CHECK(canonical_echo(a) == canonical_echo(b));
  auto c = default_config(std::vector<std::string>{"em.seed=1"});
  CHECK(config_hash(a) != config_hash(c));
  const auto echo = canonical_echo(a);
  for (auto key : {"harmonise.cosine_min = 0.76", "em.tol = 0.001", "phi.eps = 1e-06", "tiers.p_high = 90",
                   "anchoring.n_perm = 5000", "ingest.min_n = 50", "harmonise.salt = phi"}) {
    CHECK(echo.find(key) != std::string::npos);
  }
  // Echo text parses back to the same configuration.
  std::string ini, section;
  for (std::size_t pos = 0; pos < echo.size();) {
    const auto nl = echo.find('\n', pos);
    const auto line = echo.substr(pos, nl - pos);
    pos = nl + 1;
    const auto dot = line.find('.'), eq = line.find(" = ");
    if (line.substr(0, dot) != section) {
      section = line.substr(0, dot);
      ini += "[" + section + "]\n";
    }
    ini += line.substr(dot + 1, eq - dot - 1) + " = " + line.substr(eq + 3) + "\n";
  }
  CHECK(canonical_echo(parse_config(ini)) == echo);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
