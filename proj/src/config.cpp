#include "phi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "phi/error.hpp"

namespace phi {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view expected) {
  throw ConfigError("config", fmt::format("{} = '{}' is not {}", key, value, expected));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* b = value.data();
  const char* e = b + value.size();
  if (!value.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) bad_value(key, value, "a number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, value, "a finite number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v;
  for (char c : value) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "a boolean");
}

std::vector<double> parse_number_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i ? "," : "", v[i]);
  return out;
}

std::string join_strings(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += v[i];
  }
  return out;
}

char parse_delimiter(const std::string& key, const std::string& value) {
  if (value == "tab" || value == "\\t") return '\t';
  if (value.size() != 1 || value == "\"" ) bad_value(key, value, "a single delimiter character or 'tab'");
  return value[0];
}

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

struct Field {
  std::string name;  // section.key
  std::function<void(RunConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool hashed = true;
};

template <typename T, typename Get>
Field number_field(std::string name, Get member) {
  return {name,
          [name, member](RunConfig& c, const std::string& v, const fs::path&) { member(c) = parse_number<T>(name, v); },
          [member](const RunConfig& c) { return fmt::format("{}", member(c)); }};
}

template <typename Get>
Field bool_field(std::string name, Get member) {
  return {name, [name, member](RunConfig& c, const std::string& v, const fs::path&) { member(c) = parse_bool(name, v); },
          [member](const RunConfig& c) { return std::string(member(c) ? "true" : "false"); }};
}

template <typename Get>
Field text_field(std::string name, Get member) {
  return {name, [member](RunConfig& c, const std::string& v, const fs::path&) { member(c) = v; },
          [member](const RunConfig& c) { return member(c); }};
}

template <typename Config>
auto& suffix(Config& c, std::string_view alias) {
  for (auto& r : c.harmonise.suffixes) {
    if (r.alias == alias) return r;
  }
  throw ConfigError("config", fmt::format("suffix rule {} missing", alias));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back({"input.paths",
                 [](RunConfig& c, const std::string& v, const fs::path& base) {
                   c.inputs.clear();
                   for (const auto& item : split(v, ';')) {
                     if (!item.empty()) c.inputs.push_back(resolve(item, base));
                   }
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> s;
                   for (const auto& p : c.inputs) s.push_back(p.generic_string());
                   return join_strings(s, ';');
                 }});
    f.push_back({"input.delimiter",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   c.parse.delimiter = parse_delimiter("input.delimiter", v);
                 },
                 [](const RunConfig& c) { return c.parse.delimiter == '\t' ? std::string("tab") : std::string(1, c.parse.delimiter); }});

    auto column = [&](const char* key, std::string ingest::ColumnMapping::*m) {
      f.push_back(text_field(fmt::format("columns.{}", key), [m](auto& c) -> auto& { return c.parse.columns.*m; }));
    };
    column("organisation", &ingest::ColumnMapping::organisation);
    column("directorate", &ingest::ColumnMapping::directorate);
    column("department", &ingest::ColumnMapping::department);
    column("service_plan", &ingest::ColumnMapping::service_plan);
    column("creditor_name", &ingest::ColumnMapping::creditor_name);
    column("payment_date", &ingest::ColumnMapping::payment_date);
    column("transaction_no", &ingest::ColumnMapping::transaction_no);
    column("net_amount", &ingest::ColumnMapping::net_amount);
    column("subjective_group", &ingest::ColumnMapping::subjective_group);
    column("subjective_subgroup", &ingest::ColumnMapping::subjective_subgroup);
    column("subjective_detail", &ingest::ColumnMapping::subjective_detail);

    f.push_back({"ingest.date_formats",
                 [](RunConfig& c, const std::string& v, const fs::path&) { c.parse.date_formats = split(v, ';'); },
                 [](const RunConfig& c) { return join_strings(c.parse.date_formats, ';'); }});
    f.push_back(number_field<std::size_t>("ingest.min_n", [](auto& c) -> auto& { return c.min_n; }));

    f.push_back(number_field<double>("harmonise.cosine_min", [](auto& c) -> auto& { return c.harmonise.rule.cosine_min; }));
    f.push_back(number_field<int>("harmonise.ratio_min", [](auto& c) -> auto& { return c.harmonise.rule.ratio_min; }));
    f.push_back(number_field<double>("harmonise.jaccard_min", [](auto& c) -> auto& { return c.harmonise.rule.jaccard_min; }));
    f.push_back(number_field<double>("harmonise.ensemble_min", [](auto& c) -> auto& { return c.harmonise.rule.ensemble_min; }));
    f.push_back(number_field<double>("harmonise.ensemble_w_cosine", [](auto& c) -> auto& { return c.harmonise.rule.w_cosine; }));
    f.push_back(number_field<double>("harmonise.ensemble_w_ratio", [](auto& c) -> auto& { return c.harmonise.rule.w_ratio; }));
    f.push_back(number_field<double>("harmonise.ensemble_w_jaccard", [](auto& c) -> auto& { return c.harmonise.rule.w_jaccard; }));
    f.push_back(bool_field("harmonise.suffix_ltd", [](auto& c) -> auto& { return suffix(c, "LTD").enabled; }));
    f.push_back(bool_field("harmonise.suffix_co", [](auto& c) -> auto& { return suffix(c, "CO").enabled; }));
    f.push_back(bool_field("harmonise.suffix_academy", [](auto& c) -> auto& { return suffix(c, "ACADEMY").enabled; }));
    f.push_back(text_field("harmonise.salt", [](auto& c) -> auto& { return c.harmonise.salt; }));

    f.push_back(number_field<double>("em.tol", [](auto& c) -> auto& { return c.em.tol; }));
    f.push_back(number_field<int>("em.max_iter", [](auto& c) -> auto& { return c.em.max_iter; }));
    f.push_back(number_field<int>("em.n_init", [](auto& c) -> auto& { return c.em.n_init; }));
    f.push_back(number_field<std::uint64_t>("em.seed", [](auto& c) -> auto& { return c.em.seed; }));
    f.push_back(number_field<double>("em.reg_covar", [](auto& c) -> auto& { return c.em.reg_covar; }));
    f.push_back(number_field<int>("em.kmeans_max_iter", [](auto& c) -> auto& { return c.em.kmeans_max_iter; }));
    f.push_back(number_field<double>("em.prune_threshold", [](auto& c) -> auto& { return c.em.prune_threshold; }));

    f.push_back(number_field<double>("phi.eps", [](auto& c) -> auto& { return c.eps; }));

    f.push_back(number_field<double>("tiers.p_low", [](auto& c) -> auto& { return c.tiers.p_low; }));
    f.push_back(number_field<double>("tiers.p_high", [](auto& c) -> auto& { return c.tiers.p_high; }));
    f.push_back(number_field<std::size_t>("tiers.min_cohort", [](auto& c) -> auto& { return c.tiers.min_cohort; }));

    f.push_back(bool_field("anchoring.enabled", [](auto& c) -> auto& { return c.anchoring_enabled; }));
    f.push_back(number_field<double>("anchoring.bin_width", [](auto& c) -> auto& { return c.anchoring.peaks.bin_width; }));
    f.push_back(number_field<double>("anchoring.range_min", [](auto& c) -> auto& { return c.anchoring.peaks.range_min; }));
    f.push_back(number_field<double>("anchoring.range_max", [](auto& c) -> auto& { return c.anchoring.peaks.range_max; }));
    f.push_back(number_field<double>("anchoring.sigma_bins", [](auto& c) -> auto& { return c.anchoring.peaks.sigma_bins; }));
    f.push_back(number_field<double>("anchoring.truncate", [](auto& c) -> auto& { return c.anchoring.peaks.truncate; }));
    f.push_back(number_field<double>("anchoring.prominence_frac", [](auto& c) -> auto& { return c.anchoring.peaks.prominence_frac; }));
    f.push_back(number_field<double>("anchoring.min_position", [](auto& c) -> auto& { return c.anchoring.peaks.min_position; }));
    f.push_back({"anchoring.windows_pct",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   c.anchoring.windows_pct = parse_number_list("anchoring.windows_pct", v);
                 },
                 [](const RunConfig& c) { return join_numbers(c.anchoring.windows_pct); }});
    f.push_back(number_field<std::size_t>("anchoring.n_perm", [](auto& c) -> auto& { return c.anchoring.n_perm; }));
    f.push_back(number_field<std::uint64_t>("anchoring.seed", [](auto& c) -> auto& { return c.anchoring.seed; }));
    f.push_back(bool_field("anchoring.p_add_one", [](auto& c) -> auto& { return c.anchoring.p_add_one; }));
    f.push_back({"anchoring.exogenous_peaks",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   auto peaks = parse_number_list("anchoring.exogenous_peaks", v);
                   if (peaks.empty()) {
                     c.anchoring.exogenous_peaks.reset();
                   } else {
                     c.anchoring.exogenous_peaks = std::move(peaks);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.anchoring.exogenous_peaks ? join_numbers(*c.anchoring.exogenous_peaks) : std::string();
                 }});

    f.push_back(number_field<std::size_t>("report.top_k", [](auto& c) -> auto& { return c.top_k; }));
    f.push_back(number_field<int>("report.cv_ddof", [](auto& c) -> auto& { return c.cv_ddof; }));

    f.push_back({"output.dir",
                 [](RunConfig& c, const std::string& v, const fs::path& base) { c.output_dir = resolve(v, base); },
                 [](const RunConfig& c) { return c.output_dir.generic_string(); },
                 false});
    f.push_back(bool_field("output.plot_images", [](auto& c) -> auto& { return c.plot_images; }));
    f.back().hashed = false;
    f.push_back(number_field<unsigned>("run.threads", [](auto& c) -> auto& { return c.threads; }));
    f.back().hashed = false;
    return f;
  }();
  return kFields;
}

const Field* find_field(std::string_view name) {
  for (const auto& f : fields()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

void set_field(RunConfig& cfg, const std::string& name, const std::string& value, const fs::path& base) {
  const Field* f = find_field(name);
  if (!f) throw ConfigError("config", fmt::format("unknown setting '{}'", name));
  f->set(cfg, value, base);
}

RunConfig from_ptree(const boost::property_tree::ptree& tree, std::span<const std::string> overrides,
                     const fs::path& base_dir) {
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config", fmt::format("setting '{}' is outside any section", section));
    }
    for (const auto& [key, value] : body) set_field(cfg, section + "." + key, trim(value.data()), base_dir);
  }
  for (const auto& o : overrides) apply_setting(cfg, o);
  validate(cfg);
  return cfg;
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view assignment, const std::filesystem::path& base_dir) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("config", fmt::format("override '{}' is not of the form section.key=value", assignment));
  }
  set_field(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), base_dir);
}

RunConfig parse_config(std::string_view ini_text, std::span<const std::string> overrides,
                       const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", fmt::format("INI syntax error at line {}: {}", e.line(), e.message()));
  }
  return from_ptree(tree, overrides, base_dir);
}

RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", fmt::format("cannot open config file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides, path.parent_path());
}

RunConfig default_config(std::span<const std::string> overrides) {
  RunConfig cfg;
  for (const auto& o : overrides) apply_setting(cfg, o);
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("config", msg); };
  auto unit = [&](double v, const char* key) {
    if (!(v >= 0 && v <= 1)) fail(fmt::format("{} must lie in [0, 1], got {}", key, v));
  };
  if (c.parse.delimiter == '"' || c.parse.delimiter == '\n' || c.parse.delimiter == '\r') {
    fail("input.delimiter cannot be a quote or line break");
  }
  if (c.parse.columns.creditor_name.empty()) fail("columns.creditor_name is required");
  if (c.parse.columns.net_amount.empty()) fail("columns.net_amount is required");
  if (c.parse.date_formats.empty()) fail("ingest.date_formats needs at least one format");
  if (c.min_n < 1) fail("ingest.min_n must be at least 1");

  const auto& r = c.harmonise.rule;
  unit(r.cosine_min, "harmonise.cosine_min");
  unit(r.jaccard_min, "harmonise.jaccard_min");
  unit(r.ensemble_min, "harmonise.ensemble_min");
  if (r.ratio_min < 0 || r.ratio_min > 100) fail("harmonise.ratio_min must lie in [0, 100]");
  if (r.w_cosine < 0 || r.w_ratio < 0 || r.w_jaccard < 0 || !(r.w_cosine + r.w_ratio + r.w_jaccard > 0)) {
    fail("harmonise ensemble weights must be non-negative with a positive sum");
  }

  if (!(c.em.tol > 0)) fail("em.tol must be positive");
  if (c.em.max_iter < 1) fail("em.max_iter must be at least 1");
  if (c.em.n_init < 1) fail("em.n_init must be at least 1");
  if (!(c.em.reg_covar > 0)) fail("em.reg_covar must be positive");
  if (c.em.kmeans_max_iter < 1) fail("em.kmeans_max_iter must be at least 1");
  // A dominant component always carries at least 1/4 of the mass, so pruning
  // above 0.25 could empty a model.
  if (!(c.em.prune_threshold >= 0 && c.em.prune_threshold <= 0.25)) fail("em.prune_threshold must lie in [0, 0.25]");

  if (!(c.eps >= 0)) fail("phi.eps must be non-negative");
  if (!(c.tiers.p_low >= 0 && c.tiers.p_low <= c.tiers.p_high && c.tiers.p_high <= 100)) {
    fail("tiers need 0 <= p_low <= p_high <= 100");
  }
  if (c.tiers.min_cohort < 1) fail("tiers.min_cohort must be at least 1");

  const auto& p = c.anchoring.peaks;
  if (!(p.bin_width > 0)) fail("anchoring.bin_width must be positive");
  if (!(p.range_max > p.range_min)) fail("anchoring.range_max must exceed anchoring.range_min");
  if (!(p.sigma_bins > 0)) fail("anchoring.sigma_bins must be positive");
  if (!(p.truncate > 0)) fail("anchoring.truncate must be positive");
  if (!(p.prominence_frac >= 0)) fail("anchoring.prominence_frac must be non-negative");
  if (c.anchoring.windows_pct.empty()) fail("anchoring.windows_pct needs at least one window");
  for (double w : c.anchoring.windows_pct) {
    if (!(w > 0)) fail("anchoring.windows_pct entries must be positive");
  }
  if (c.anchoring.n_perm < 1) fail("anchoring.n_perm must be at least 1");
  if (c.anchoring.exogenous_peaks) {
    for (double v : *c.anchoring.exogenous_peaks) {
      if (!(v > 0)) fail("anchoring.exogenous_peaks entries must be positive");
    }
  }
  if (c.top_k < 1) fail("report.top_k must be at least 1");
  if (c.cv_ddof != 0 && c.cv_ddof != 1) fail("report.cv_ddof must be 0 or 1");
  if (c.threads < 1) fail("run.threads must be at least 1");
}

std::string canonical_echo(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    if (f.hashed) out += fmt::format("{} = {}\n", f.name, f.get(cfg));
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(canonical_echo(cfg)); }

}  // namespace phi
