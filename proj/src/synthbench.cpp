#include "phi/synthbench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include "json.hpp"

#include "phi/csv.hpp"
#include "phi/error.hpp"
#include "phi/harmonise.hpp"
#include "phi/rng.hpp"

namespace phi::synth {

namespace {

double std_normal_quantile(double u) {
  static const boost::math::normal_distribution<double> kStd;
  return boost::math::quantile(kStd, u);
}

Money to_pence(double gbp) { return Money::from_pence(std::llround(gbp * 100.0)); }

// Directorate layout of the case-study cohort, by supplier count.
const std::vector<std::pair<std::string, std::size_t>>& directorate_layout() {
  static const std::vector<std::pair<std::string, std::size_t>> kLayout = {
      {"Adult Social Care and Integration", 70},
      {"Children and Education", 8},
      {"Finance", 5},
      {"HR and Support Services", 4},
      {"Health Housing & Adult So Care", 2},
      {"Housing and Communities", 7},
      {"Housing and Communities HRA", 1},
      {"Place Directorate", 6},
      {"Public Health", 1},
      {"Transport Environment and Planning", 15},
  };
  return kLayout;
}

// Pronounceable made-up words from a hashed index; callers that need
// disjoint vocabularies check for repeats.
std::string made_up_word(std::uint64_t i) {
  static const char* kOnsets[] = {"B", "BR", "C", "CR", "D", "DR", "F", "G", "GR", "H", "K", "L", "M", "N",
                                  "P", "PR", "R", "S", "ST", "T", "TR", "V", "W", "Z"};
  static const char* kNuclei[] = {"A", "E", "I", "O", "U", "AI", "EA", "OU"};
  static const char* kCodas[] = {"N", "R", "L", "M", "ND", "RK", "ST", "X"};
  constexpr std::size_t no = std::size(kOnsets), nn = std::size(kNuclei), nc = std::size(kCodas);
  std::string w;
  std::uint64_t x = CounterRng(0x6e616d65, i)();
  for (int syl = 0; syl < 3; ++syl) {
    w += kOnsets[x % no];
    x /= no;
    w += kNuclei[x % nn];
    x /= nn;
  }
  w += kCodas[x % nc];
  return w;
}

std::string supplier_name(std::size_t i, std::size_t flavour) {
  static const char* kSuffix[] = {"LTD", "LIMITED", "", "AND CO"};
  std::string base = made_up_word(2 * i) + " " + made_up_word(2 * i + 1);
  const char* s = kSuffix[flavour % std::size(kSuffix)];
  return *s ? base + " " + s : base;
}

std::string title_case(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (auto& c : out) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = start ? c : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      start = false;
    } else {
      start = true;
    }
  }
  return out;
}

SyntheticSpec make_spec(std::string name, Archetype a, std::vector<ModeSpec> modes, std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.name = std::move(name);
  s.archetype = a;
  s.modes = std::move(modes);
  s.n_payments = n;
  s.seed = seed;
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return CounterRng(seed, stream)(); }

}  // namespace

std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::kUnimodal: return "unimodal";
    case Archetype::kTieredMultimodal: return "tiered-multimodal";
    case Archetype::kSeparatedBimodal: return "separated-bimodal";
    case Archetype::kHeavyTail: return "heavy-tail";
    case Archetype::kHeaped: return "heaped";
  }
  return "unimodal";
}

std::optional<Archetype> parse_archetype(std::string_view s) {
  for (auto a : {Archetype::kUnimodal, Archetype::kTieredMultimodal, Archetype::kSeparatedBimodal,
                 Archetype::kHeavyTail, Archetype::kHeaped}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::vector<std::size_t> allocate_counts(std::span<const double> weights, std::size_t n) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty() || !(total > 0)) return counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++counts[remainders[j % remainders.size()].second];
  return counts;
}

std::vector<Money> sample_payments(const SyntheticSpec& spec) {
  CounterRng rng(spec.seed, 0);
  const std::size_t n = spec.n_payments;
  const auto n_heap = std::min(n, static_cast<std::size_t>(std::lround(spec.heap_fraction * static_cast<double>(n))));
  const auto n_tail =
      std::min(n - n_heap, static_cast<std::size_t>(std::lround(spec.pareto_fraction * static_cast<double>(n))));
  std::vector<double> weights;
  for (const auto& m : spec.modes) weights.push_back(m.weight);
  const auto counts = allocate_counts(weights, n - n_heap - n_tail);

  std::vector<Money> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n_heap; ++i) out.push_back(to_pence(spec.heap_gbp));
  for (std::size_t c = 0; c < spec.modes.size(); ++c) {
    const auto& m = spec.modes[c];
    for (std::size_t i = 0; i < counts[c]; ++i) {
      double x = 0;
      do {
        x = m.mean_gbp + m.sd_gbp * std_normal_quantile(rng.uniform_open());
      } while (x < 0.01);
      out.push_back(to_pence(x));
    }
  }
  for (std::size_t i = 0; i < n_tail; ++i) {
    out.push_back(to_pence(spec.pareto_xm * std::pow(rng.uniform_open(), -1.0 / spec.pareto_alpha)));
  }
  if (out.size() != n) throw NumericalError("synth", fmt::format("spec '{}' has no components to draw from", spec.name));
  for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

SyntheticSpec supplier_a_like(std::string name, std::size_t n, std::uint64_t seed) {
  auto s = make_spec(std::move(name), Archetype::kUnimodal, {{1.0, 487, 110}}, n, seed);
  return s;
}

SyntheticSpec supplier_b_like(std::string name, std::size_t n, std::uint64_t seed) {
  auto s = make_spec(std::move(name), Archetype::kSeparatedBimodal, {{0.52, 1210, 180}, {0.48, 8967, 2600}}, n, seed);
  // A thin run of large one-off invoices above the second regime.
  s.pareto_fraction = 0.08;
  s.pareto_xm = 20000;
  s.pareto_alpha = 3.0;
  return s;
}

SyntheticSpec supplier_c_like(std::string name, std::size_t n, std::uint64_t seed) {
  return make_spec(std::move(name), Archetype::kTieredMultimodal, {{0.5, 426, 30}, {0.3, 911, 60}, {0.2, 1966, 120}},
                   n, seed);
}

SyntheticSpec supplier_d_like(std::string name, std::size_t n, std::uint64_t seed) {
  auto s = make_spec(std::move(name), Archetype::kTieredMultimodal,
                     {{0.24, 2187, 12}, {0.24, 3105, 10}, {0.24, 3208, 10}, {0.28, 3720, 14}}, n, seed);
  s.subjective_detail = "Residential Care";
  return s;
}

SyntheticSpec max_phi_like(std::string name, std::size_t n, std::uint64_t seed) {
  return make_spec(std::move(name), Archetype::kSeparatedBimodal, {{0.81, 3088, 900}, {0.19, 154625, 30000}}, n, seed);
}

SyntheticSpec heavy_tail_like(std::string name, std::size_t n, std::uint64_t seed) {
  auto s = make_spec(std::move(name), Archetype::kHeavyTail, {{1.0, 800, 150}}, n, seed);
  s.pareto_fraction = 0.08;
  s.pareto_xm = 1500;
  s.pareto_alpha = 1.2;
  return s;
}

SyntheticSpec heaped_like(std::string name, std::size_t n, std::uint64_t seed) {
  auto s = make_spec(std::move(name), Archetype::kHeaped, {{1.0, 1000, 400}}, n, seed);
  s.heap_fraction = 0.6;
  s.heap_gbp = 1000;
  return s;
}

SyntheticSpec separated_bimodal(std::string name, double separation, std::size_t n, std::uint64_t seed) {
  const double sd = 200;
  return make_spec(std::move(name), Archetype::kSeparatedBimodal,
                   {{0.5, 2000, sd}, {0.5, 2000 + separation * sd, sd}}, n, seed);
}

std::vector<SyntheticSpec> rank_pair(std::string_view pair_id, std::uint64_t seed) {
  // The separated member is x -> 5000 + 40 (x - 1210) applied to the tiered one;
  // both draw from the same seed, so their samples match up to that map.
  const std::string id(pair_id);
  auto tiered = make_spec(supplier_name(7000 + derive_seed(seed, 1) % 1000, 0), Archetype::kTieredMultimodal,
                          {{0.7, 1210, 50}, {0.3, 1610, 50}}, 400, seed);
  auto separated = make_spec(supplier_name(8000 + derive_seed(seed, 2) % 1000, 1), Archetype::kSeparatedBimodal,
                             {{0.7, 5000, 2000}, {0.3, 21000, 2000}}, 400, seed);
  tiered.pair_id = separated.pair_id = id;
  tiered.pair_role = "tiered";
  separated.pair_role = "separated";
  return {separated, tiered};
}

std::vector<SyntheticSpec> default_cohort(const CohortOptions& opts) {
  CounterRng rng(opts.seed, 0);
  std::vector<std::string> directorates;
  for (const auto& [name, count] : directorate_layout()) directorates.insert(directorates.end(), count, name);

  auto volume = [&](std::size_t lo) {
    const double base = static_cast<double>(lo) - 150.0 * std::log(rng.uniform_open());
    const double n = std::min(1500.0, base) * opts.volume_scale;
    return static_cast<std::size_t>(std::max(static_cast<double>(lo), std::round(n)));
  };

  std::vector<SyntheticSpec> specs;
  std::size_t name_index = 0;
  std::set<std::string> used_words;
  auto claim = [&](const std::string& name) {
    const auto sp = name.find(' ');
    const auto sp2 = name.find(' ', sp + 1);
    const std::string w1 = name.substr(0, sp), w2 = name.substr(sp + 1, sp2 - sp - 1);
    if (used_words.count(w1) || used_words.count(w2)) return false;
    used_words.insert(w1);
    used_words.insert(w2);
    return true;
  };
  auto next_name = [&] {
    const auto flavour = rng.below(4);
    std::string name;
    do {
      name = supplier_name(++name_index, flavour);
    } while (!claim(name));
    return name;
  };
  auto next_seed = [&] { return derive_seed(opts.seed, 1000 + specs.size()); };

  // Named case-study shapes first, then a broad background.
  specs.push_back(max_phi_like(next_name(), volume(120), next_seed()));
  for (int i = 0; i < 3; ++i) specs.push_back(supplier_b_like(next_name(), volume(150), next_seed()));
  for (int i = 0; i < 4; ++i) specs.push_back(supplier_c_like(next_name(), volume(150), next_seed()));
  for (int i = 0; i < 4; ++i) specs.push_back(supplier_d_like(next_name(), volume(200), next_seed()));
  for (int i = 0; i < 2; ++i) {
    for (auto& s : rank_pair(fmt::format("pair-{}", i + 1), next_seed())) {
      s.n_payments = static_cast<std::size_t>(std::lround(static_cast<double>(s.n_payments) * opts.volume_scale));
      s.n_payments = std::max<std::size_t>(s.n_payments, 100);
      claim(s.name);
      specs.push_back(std::move(s));
    }
  }
  for (int i = 0; i < 6; ++i) specs.push_back(heavy_tail_like(next_name(), volume(80), next_seed()));
  for (int i = 0; i < 3; ++i) specs.push_back(heaped_like(next_name(), volume(60), next_seed()));

  static const double kAnchors[] = {1150, 7450, 11050, 14350, 16550, 20750, 23450};
  while (specs.size() < opts.analytic_suppliers) {
    const double u = rng.uniform();
    // Most routine suppliers bill a few hundred pounds a time.
    const double centre = 150.0 * std::pow(30.0, std::pow(rng.uniform(), 1.6));
    const double rel = 0.08 + 0.25 * rng.uniform();
    const std::size_t n = volume(50);
    const std::uint64_t seed = next_seed();
    if (u < 0.55) {
      specs.push_back(
          make_spec(next_name(), Archetype::kUnimodal, {{1.0, centre, rel * centre}}, n + volume(100), seed));
    } else if (u < 0.75) {
      const double step = 1.3 + rng.uniform();
      const double w = 0.4 + 0.3 * rng.uniform();
      specs.push_back(make_spec(next_name(), Archetype::kTieredMultimodal,
                                {{w, centre, 0.05 * centre}, {1 - w, centre * step, 0.05 * centre * step}}, n, seed));
    } else if (u < 0.9) {
      // Regimes pinned near recurring anchor values.
      const double a = kAnchors[rng.below(std::size(kAnchors))];
      const double b = kAnchors[rng.below(std::size(kAnchors))];
      const double w = 0.5 + 0.3 * rng.uniform();
      specs.push_back(make_spec(next_name(), Archetype::kSeparatedBimodal,
                                {{w, a * (0.97 + 0.06 * rng.uniform()), 0.02 * a},
                                 {1 - w, b * (0.97 + 0.06 * rng.uniform()), 0.02 * b}},
                                n, seed));
    } else {
      auto s = heavy_tail_like(next_name(), n, seed);
      s.modes[0] = {1.0, centre, rel * centre};
      s.pareto_xm = 1.5 * centre;
      specs.push_back(std::move(s));
    }
  }
  specs.resize(opts.analytic_suppliers);

  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& s = specs[i];
    s.directorate = directorates[(i * 37) % directorates.size()];
    if (rng.below(3) == 0) s.name_variants.push_back(title_case(s.name) + ".");
    if (rng.below(4) == 0) s.n_nonpositive = 1 + rng.below(8);
  }
  for (std::size_t i = 0; i < opts.low_volume_suppliers; ++i) {
    const double centre = 250.0 * std::pow(40.0, rng.uniform());
    auto s = make_spec(next_name(), Archetype::kUnimodal, {{1.0, centre, 0.2 * centre}}, 1 + rng.below(49),
                       derive_seed(opts.seed, 5000 + i));
    s.directorate = directorates[rng.below(directorates.size())];
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<SyntheticSpec> performance_cohort(std::size_t target_rows, std::uint64_t seed) {
  CohortOptions opts;
  opts.seed = seed;
  auto rows = [](const std::vector<SyntheticSpec>& specs) {
    std::size_t r = 0;
    for (const auto& s : specs) r += s.n_payments + s.n_nonpositive;
    return r;
  };
  const std::size_t base = rows(default_cohort(opts));
  opts.volume_scale = static_cast<double>(target_rows) / static_cast<double>(base);
  return default_cohort(opts);
}

void write_corpus_csv(std::span<const SyntheticSpec> specs, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"Organisation Name", "Directorate", "Department", "Service Plan",
                                               "Creditor Name", "Payment Date", "Transaction No", "Net Amount",
                                               "Subjective Group", "Subjective Subgroup", "Subjective Detail"});
  std::size_t txn = 0;
  for (const auto& s : specs) {
    const auto payments = sample_payments(s);
    CounterRng rng(s.seed, 1);
    std::vector<Money> amounts = payments;
    for (std::size_t i = 0; i < s.n_nonpositive; ++i) {
      amounts.push_back(i % 3 == 0 ? Money{} : Money::from_pence(-static_cast<std::int64_t>(100 + rng.below(500000))));
    }
    for (std::size_t i = 0; i < amounts.size(); ++i) {
      ++txn;
      // Variants cover a minority of rows so the canonical spelling stays modal.
      std::string name = s.name;
      if (!s.name_variants.empty() && i % 5 == 4) name = s.name_variants[(i / 5) % s.name_variants.size()];
      const int day_offset = static_cast<int>((txn * 7919) % 184);
      static const int kMonthDays[] = {31, 30, 31, 31, 30, 31};  // May..Oct
      int month = 0, day = day_offset;
      while (day >= kMonthDays[month]) day -= kMonthDays[month++];
      csv::write_row(out, std::vector<std::string>{"Synthetic Council", s.directorate, "", "", name,
                                                   fmt::format("{:02d}/{:02d}/2025", day + 1, month + 5),
                                                   fmt::format("T{:07d}", txn), amounts[i].str(), "Supplies and Services",
                                                   "", s.subjective_detail});
    }
  }
}

void write_ground_truth(std::span<const SyntheticSpec> specs, std::string_view salt, std::ostream& out) {
  nlohmann::ordered_json j;
  j["salt"] = salt;
  auto& arr = j["suppliers"] = nlohmann::ordered_json::array();
  for (const auto& s : specs) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["pseudonym"] = harmonise::pseudonym(s.name, salt);
    e["archetype"] = to_string(s.archetype);
    e["n_payments"] = s.n_payments;
    e["n_nonpositive"] = s.n_nonpositive;
    e["seed"] = s.seed;
    e["directorate"] = s.directorate;
    auto& modes = e["modes"] = nlohmann::ordered_json::array();
    for (const auto& m : s.modes) modes.push_back({{"weight", m.weight}, {"mean_gbp", m.mean_gbp}, {"sd_gbp", m.sd_gbp}});
    if (s.heap_fraction > 0) e["heap"] = {{"fraction", s.heap_fraction}, {"value_gbp", s.heap_gbp}};
    if (s.pareto_fraction > 0) {
      e["pareto"] = {{"fraction", s.pareto_fraction}, {"xm_gbp", s.pareto_xm}, {"alpha", s.pareto_alpha}};
    }
    e["name_variants"] = s.name_variants;
    if (!s.pair_id.empty()) e["pair"] = {{"id", s.pair_id}, {"role", s.pair_role}};
    arr.push_back(std::move(e));
  }
  out << j.dump(2) << '\n';
}

std::filesystem::path generate_cohort(std::span<const SyntheticSpec> specs, const std::filesystem::path& dir,
                                      std::string_view salt) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / "corpus.csv";
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigError("synth", fmt::format("cannot write {}", csv_path.string()));
    write_corpus_csv(specs, out);
  }
  std::ofstream gt(dir / "ground_truth.json", std::ios::binary);
  if (!gt) throw ConfigError("synth", fmt::format("cannot write {}", (dir / "ground_truth.json").string()));
  write_ground_truth(specs, salt, gt);
  return csv_path;
}

namespace {

std::string describe(const score::PhiScore& s) {
  const auto& c = s.components;
  return fmt::format("{}: M={} A={:.4f} T={:.4f} D={:.4f} PHI={:.4f} contrib M={:.1f}% A={:.1f}% T={:.1f}% D={:.1f}%",
                     s.supplier, c.m, c.a, c.t, c.d, c.phi, c.contributions.m, c.contributions.a, c.contributions.t,
                     c.contributions.d);
}

}  // namespace

std::vector<PairCheck> oracle_rank_check(std::span<const SyntheticSpec> specs, std::span<const score::PhiScore> scores,
                                         std::string_view salt) {
  std::map<std::string, const score::PhiScore*> by_id;
  for (const auto& s : scores) by_id[s.supplier] = &s;
  std::map<std::string, PairCheck> pairs;
  for (const auto& s : specs) {
    if (s.pair_id.empty()) continue;
    auto& pc = pairs[s.pair_id];
    pc.pair_id = s.pair_id;
    (s.pair_role == "separated" ? pc.separated : pc.tiered) = harmonise::pseudonym(s.name, salt);
  }
  std::vector<PairCheck> out;
  for (auto& [id, pc] : pairs) {
    auto a = by_id.find(pc.separated);
    auto b = by_id.find(pc.tiered);
    pc.found = a != by_id.end() && b != by_id.end();
    if (pc.found) {
      pc.phi_separated = a->second->components.phi;
      pc.phi_tiered = b->second->components.phi;
      pc.ok = pc.phi_separated > pc.phi_tiered;
      pc.detail = describe(*a->second) + "\n" + describe(*b->second);
    } else {
      pc.detail = "pair member missing from the scored cohort";
    }
    out.push_back(std::move(pc));
  }
  return out;
}

std::vector<anchoring::CentreObservation> synthetic_centres(const CentreDesign& d, std::uint64_t seed,
                                                            std::uint64_t stream) {
  CounterRng rng(seed, stream);
  std::vector<anchoring::CentreObservation> out;
  auto draw = [&](double p_near) {
    if (rng.uniform() < p_near) {
      const double peak = d.peaks[rng.below(d.peaks.size())];
      return peak * (1.0 + (2.0 * rng.uniform() - 1.0) * d.window_pct / 100.0);
    }
    for (;;) {
      const double x = d.lo + (d.hi - d.lo) * rng.uniform();
      if (!anchoring::within_window(anchoring::nearest_peak_distance(x, d.peaks).pct_distance, d.window_pct)) return x;
    }
  };
  for (std::size_t i = 0; i < d.n_high; ++i) {
    out.push_back({fmt::format("H{:04d}", i), draw(d.p_high), score::Tier::kHigh, 1.0, 0.0});
  }
  for (std::size_t i = 0; i < d.n_low; ++i) {
    out.push_back({fmt::format("L{:04d}", i), draw(d.p_low), score::Tier::kLow, 1.0, 0.0});
  }
  return out;
}

}  // namespace phi::synth
