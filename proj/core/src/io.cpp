#include "pairclone/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pairclone/likelihood.hpp"

namespace pairclone {
namespace {

constexpr const char* kCountColumns[kNumOutcomes] = {"n00", "n01", "n10", "n11", "nm0", "nm1", "n0m", "n1m"};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string where(const std::filesystem::path& path, long line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

long parse_count(const std::string& text, const std::filesystem::path& path, long line) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw DataError(where(path, line) + "'" + text + "' is not an integer count");
  }
  if (v < 0) throw DataError(where(path, line) + "negative count " + t);
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  return out;
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const std::filesystem::path& path) {
  std::vector<std::string> g;
  for (const auto& f : got) g.push_back(trim(f));
  if (g != want) {
    std::string w;
    for (const auto& f : want) w += (w.empty() ? "" : " ") + f;
    throw DataError(where(path, 1) + "expected header: " + w);
  }
}

// Dense table built from (sample, row) keyed cells.
struct CellCollector {
  std::vector<std::string> samples;
  std::vector<std::string> rows;
  std::unordered_map<std::string, int> sample_index;
  std::unordered_map<std::string, int> row_index;
  std::map<std::pair<int, int>, std::array<double, kNumOutcomes>> cells;

  int sample(const std::string& id) {
    auto [it, added] = sample_index.emplace(id, static_cast<int>(samples.size()));
    if (added) samples.push_back(id);
    return it->second;
  }
  int row(const std::string& id) {
    auto [it, added] = row_index.emplace(id, static_cast<int>(rows.size()));
    if (added) rows.push_back(id);
    return it->second;
  }
};

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t used = 0;
    try {
      out = static_cast<T>(std::stod(v, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  } else {
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
      throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
    }
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError("config key '" + key + "' needs at least one value");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(10);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;
struct Field {
  Setter set;
  Getter get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    auto real = [&f](const std::string& key, std::function<double&(RunConfig&)> ref) {
      f[key] = {[key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<double>(key, v); },
                [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
    };
    auto integer = [&f](const std::string& key, std::function<long&(RunConfig&)> ref) {
      f[key] = {[key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<long>(key, v); },
                [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
    };
    auto small = [&f](const std::string& key, std::function<int&(RunConfig&)> ref) {
      f[key] = {[key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<int>(key, v); },
                [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
    };
    auto flag = [&f](const std::string& key, std::function<bool&(RunConfig&)> ref) {
      f[key] = {[key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); },
                [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
    };
    auto list = [&f](const std::string& key, std::function<std::vector<double>&(RunConfig&)> ref) {
      f[key] = {[key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_list(key, v); },
                [ref](const RunConfig& c) { return join(ref(const_cast<RunConfig&>(c))); }};
    };

    f["variant"] = {[](RunConfig& c, const std::string& v) {
                      try {
                        c.model.variant = parse_model_variant(trim(v));
                      } catch (const std::exception& e) {
                        throw ConfigError(std::string("config key 'variant': ") + e.what());
                      }
                    },
                    [](const RunConfig& c) { return to_string(c.model.variant); }};
    real("alpha", [](RunConfig& c) -> double& { return c.model.hyper.alpha; });
    real("gamma", [](RunConfig& c) -> double& { return c.model.hyper.gamma; });
    real("d0", [](RunConfig& c) -> double& { return c.model.hyper.d0; });
    real("d", [](RunConfig& c) -> double& { return c.model.hyper.d; });
    real("d1", [](RunConfig& c) -> double& { return c.model.hyper.d1; });
    real("r", [](RunConfig& c) -> double& { return c.model.hyper.r; });
    real("d1_star", [](RunConfig& c) -> double& { return c.model.hyper.d1_star; });
    real("d2_star", [](RunConfig& c) -> double& { return c.model.hyper.d2_star; });
    f["geometric"] = {[](RunConfig& c, const std::string& v) {
                        const std::string t = trim(v);
                        if (t == "as_printed") {
                          c.model.hyper.geometric = GeometricForm::as_printed;
                        } else if (t == "shifted") {
                          c.model.hyper.geometric = GeometricForm::shifted;
                        } else {
                          throw ConfigError("config key 'geometric': expected as_printed or shifted");
                        }
                      },
                      [](const RunConfig& c) {
                        return std::string(c.model.hyper.geometric == GeometricForm::as_printed ? "as_printed"
                                                                                               : "shifted");
                      }};
    real("tree_alpha", [](RunConfig& c) -> double& { return c.model.tree.alpha; });
    real("tree_beta", [](RunConfig& c) -> double& { return c.model.tree.beta; });
    real("lambda", [](RunConfig& c) -> double& { return c.model.tree.lambda; });
    real("a_p", [](RunConfig& c) -> double& { return c.model.tree.a_p; });
    real("b_p", [](RunConfig& c) -> double& { return c.model.tree.b_p; });
    real("theta_step", [](RunConfig& c) -> double& { return c.model.theta_step; });
    real("rho_step", [](RunConfig& c) -> double& { return c.model.rho_step; });
    flag("pair_block_z", [](RunConfig& c) -> bool& { return c.model.pair_block_z; });

    small("iters", [](RunConfig& c) -> int& { return c.sampler.iters; });
    small("burnin", [](RunConfig& c) -> int& { return c.sampler.burnin; });
    small("thin", [](RunConfig& c) -> int& { return c.sampler.thin; });
    f["seed"] = {[](RunConfig& c, const std::string& v) { c.sampler.seed = parse_number<std::uint64_t>("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.sampler.seed); }};
    list("ladder", [](RunConfig& c) -> std::vector<double>& { return c.sampler.ladder; });
    real("u0", [](RunConfig& c) -> double& { return c.sampler.u0; });
    real("train_frac", [](RunConfig& c) -> double& { return c.sampler.train_frac; });
    real("test_target", [](RunConfig& c) -> double& { return c.sampler.test_target; });
    small("c_min", [](RunConfig& c) -> int& { return c.sampler.c_min; });
    small("c_max", [](RunConfig& c) -> int& { return c.sampler.c_max; });
    small("initial_C", [](RunConfig& c) -> int& { return c.sampler.initial_C; });
    flag("transdim", [](RunConfig& c) -> bool& { return c.sampler.transdim; });
    f["initial_tree"] = {[](RunConfig& c, const std::string& v) {
                           const std::string t = trim(v);
                           if (t.empty() || t == "none") {
                             c.sampler.initial_tree.reset();
                             return;
                           }
                           try {
                             c.sampler.initial_tree = TreeTopology::parse(t);
                           } catch (const std::exception& e) {
                             throw ConfigError(std::string("config key 'initial_tree': ") + e.what());
                           }
                         },
                         [](const RunConfig& c) {
                           return c.sampler.initial_tree ? c.sampler.initial_tree->to_string() : std::string("none");
                         }};
    list("candidate_ladder", [](RunConfig& c) -> std::vector<double>& { return c.sampler.candidate_ladder; });
    small("candidate_warmup", [](RunConfig& c) -> int& { return c.sampler.candidate_warmup; });
    small("candidate_advance", [](RunConfig& c) -> int& { return c.sampler.candidate_advance; });
    f["point_estimate_cap"] = {
        [](RunConfig& c, const std::string& v) {
          c.point_estimate_cap = static_cast<std::size_t>(parse_number<long>("point_estimate_cap", v));
        },
        [](const RunConfig& c) { return std::to_string(c.point_estimate_cap); }};

    small("geweke_T", [](RunConfig& c) -> int& { return c.geweke_T; });
    small("geweke_K", [](RunConfig& c) -> int& { return c.geweke_K; });
    small("geweke_C", [](RunConfig& c) -> int& { return c.geweke_C; });
    integer("geweke_L", [](RunConfig& c) -> long& { return c.geweke_L; });
    integer("geweke_depth", [](RunConfig& c) -> long& { return c.geweke_depth; });
    integer("geweke_sweeps", [](RunConfig& c) -> long& { return c.geweke_sweeps; });
    integer("geweke_prior_draws", [](RunConfig& c) -> long& { return c.geweke_prior_draws; });
    flag("broken_jacobian", [](RunConfig& c) -> bool& { return c.model.broken_jacobian; });

    f["preset"] = {[](RunConfig& c, const std::string& v) { c.preset = trim(v); },
                   [](const RunConfig& c) { return c.preset; }};
    f["depth"] = {[](RunConfig& c, const std::string& v) {
                    const std::string t = trim(v);
                    if (t.empty() || t == "none") {
                      c.depth.reset();
                    } else {
                      c.depth = parse_number<long>("depth", t);
                    }
                  },
                  [](const RunConfig& c) { return c.depth ? std::to_string(*c.depth) : std::string("none"); }};
    return f;
  }();
  return table;
}

}  // namespace

// --- count tables --------------------------------------------------------------

CountsTable parse_counts(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  std::vector<std::string> header = {"sample_id", "pair_id"};
  header.insert(header.end(), std::begin(kCountColumns), std::end(kCountColumns));
  expect_header(split_tabs(line), header, path);

  CellCollector col;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw DataError(where(path, lineno) + "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    const std::string sid = trim(fields[0]);
    const std::string pid = trim(fields[1]);
    if (sid.empty() || pid.empty()) throw DataError(where(path, lineno) + "empty identifier");
    const int t = col.sample(sid);
    const int k = col.row(pid);
    std::array<double, kNumOutcomes> n{};
    for (int g = 0; g < kNumOutcomes; ++g) n[static_cast<std::size_t>(g)] = static_cast<double>(parse_count(fields[static_cast<std::size_t>(g) + 2], path, lineno));
    if (!col.cells.emplace(std::make_pair(t, k), n).second) {
      throw DataError(where(path, lineno) + "duplicate entry for sample " + sid + ", pair " + pid);
    }
  }
  if (col.samples.empty()) throw DataError(path.string() + ": no data rows");

  CountsTable table;
  table.samples = col.samples;
  table.rows = col.rows;
  table.counts = ReadCounts(static_cast<int>(col.samples.size()), static_cast<int>(col.rows.size()));
  for (int t = 0; t < table.counts.samples(); ++t) {
    for (int k = 0; k < table.counts.pairs(); ++k) {
      const auto it = col.cells.find({t, k});
      if (it == col.cells.end()) {
        table.warnings.push_back("pair " + col.rows[static_cast<std::size_t>(k)] + " missing in sample " +
                                 col.samples[static_cast<std::size_t>(t)] + "; using zero counts");
        continue;
      }
      std::copy(it->second.begin(), it->second.end(), table.counts.cell(t, k).begin());
    }
  }
  return table;
}

void parse_snv(const std::filesystem::path& path, CountsTable& table) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const std::vector<std::string> header = {"sample_id", "snv_id", "n_total", "n_variant"};
  expect_header(split_tabs(line), header, path);

  std::unordered_map<std::string, int> sample_index;
  for (std::size_t i = 0; i < table.samples.size(); ++i) sample_index[table.samples[i]] = static_cast<int>(i);
  std::unordered_map<std::string, int> known_rows;
  for (const auto& r : table.rows) known_rows[r] = 0;

  CellCollector col;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw DataError(where(path, lineno) + "expected 4 fields, found " + std::to_string(fields.size()));
    }
    const std::string sid = trim(fields[0]);
    const std::string vid = trim(fields[1]);
    const auto st = sample_index.find(sid);
    if (st == sample_index.end()) throw DataError(where(path, lineno) + "sample " + sid + " is not in the counts file");
    if (known_rows.count(vid)) throw DataError(where(path, lineno) + "SNV id " + vid + " clashes with a pair id");
    const long total = parse_count(fields[2], path, lineno);
    const long variant = parse_count(fields[3], path, lineno);
    if (variant > total) throw DataError(where(path, lineno) + "n_variant exceeds n_total");
    const int v = col.row(vid);
    if (!col.cells.emplace(std::make_pair(st->second, v), embed_snv(total, variant)).second) {
      throw DataError(where(path, lineno) + "duplicate entry for sample " + sid + ", SNV " + vid);
    }
  }

  const int T = table.counts.samples();
  const int old_rows = table.counts.pairs();
  const int S = static_cast<int>(col.rows.size());
  ReadCounts merged(T, old_rows + S);
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < old_rows; ++k) {
      const auto src = table.counts.cell(t, k);
      std::copy(src.begin(), src.end(), merged.cell(t, k).begin());
    }
    for (int s = 0; s < S; ++s) {
      const auto it = col.cells.find({t, s});
      if (it == col.cells.end()) {
        table.warnings.push_back("SNV " + col.rows[static_cast<std::size_t>(s)] + " missing in sample " +
                                 table.samples[static_cast<std::size_t>(t)] + "; using zero counts");
        continue;
      }
      std::copy(it->second.begin(), it->second.end(), merged.cell(t, old_rows + s).begin());
    }
  }
  table.counts = std::move(merged);
  table.rows.insert(table.rows.end(), col.rows.begin(), col.rows.end());
  table.snvs += S;
}

void write_counts(const std::filesystem::path& path, const CountsTable& table) {
  auto out = open_output(path);
  out << "sample_id\tpair_id";
  for (const char* c : kCountColumns) out << '\t' << c;
  out << '\n';
  for (int t = 0; t < table.counts.samples(); ++t) {
    for (int k = 0; k < table.pairs(); ++k) {
      out << table.samples[static_cast<std::size_t>(t)] << '\t' << table.rows[static_cast<std::size_t>(k)];
      for (double v : table.counts.cell(t, k)) out << '\t' << static_cast<long>(std::llround(v));
      out << '\n';
    }
  }
}

void write_snv(const std::filesystem::path& path, const CountsTable& table) {
  auto out = open_output(path);
  out << "sample_id\tsnv_id\tn_total\tn_variant\n";
  for (int t = 0; t < table.counts.samples(); ++t) {
    for (int k = table.pairs(); k < table.counts.pairs(); ++k) {
      const auto n = table.counts.cell(t, k);
      const auto total = std::llround(std::accumulate(n.begin(), n.end(), 0.0));
      out << table.samples[static_cast<std::size_t>(t)] << '\t' << table.rows[static_cast<std::size_t>(k)] << '\t'
          << total << '\t' << std::llround(n[7]) << '\n';
    }
  }
}

CountsTable table_from_simulation(const SimData& data) {
  CountsTable table;
  table.counts = data.counts;
  table.snvs = data.snvs;
  for (int t = 0; t < data.counts.samples(); ++t) table.samples.push_back("s" + std::to_string(t + 1));
  for (int k = 0; k < data.pairs; ++k) table.rows.push_back("p" + std::to_string(k + 1));
  for (int s = 0; s < data.snvs; ++s) table.rows.push_back("v" + std::to_string(s + 1));
  return table;
}

// --- configuration -------------------------------------------------------------

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where(path, lineno) + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!fields().count(key)) throw ConfigError(where(path, lineno) + "unknown config key '" + key + "'");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError(where(path, lineno) + "config key '" + key + "' given twice");
    }
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(config, value);
}

void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings) {
  for (const auto& [k, v] : settings) apply_setting(config, k, v);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

std::string dump_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(config) + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// --- outputs -------------------------------------------------------------------

void write_z(const std::filesystem::path& path, const GenotypeMatrix& z, CodeOrdering ordering,
             const std::vector<std::string>& rows) {
  auto out = open_output(path);
  out << "row_id";
  for (int c = 0; c < z.subclones(); ++c) out << ",c" << c + 1;
  out << '\n';
  for (int k = 0; k < z.pairs(); ++k) {
    out << (static_cast<std::size_t>(k) < rows.size() ? rows[static_cast<std::size_t>(k)] : std::to_string(k + 1));
    for (int c = 0; c < z.subclones(); ++c) out << ',' << external_code(z(k, c), ordering);
    out << '\n';
  }
}

void write_weights(const std::filesystem::path& path, const Matrix& w, ModelVariant variant,
                   const std::vector<std::string>& samples) {
  auto out = open_output(path);
  out << "sample_id,w0";
  const int J = w.cols();
  const int subclones = J - 1 - (variant == ModelVariant::purity ? 1 : 0);
  for (int c = 1; c <= subclones; ++c) out << ",w" << c;
  if (variant == ModelVariant::purity) out << ",w_normal";
  out << '\n';
  out.precision(10);
  for (int t = 0; t < w.rows(); ++t) {
    out << (static_cast<std::size_t>(t) < samples.size() ? samples[static_cast<std::size_t>(t)] : std::to_string(t + 1));
    for (int j = 0; j < J; ++j) out << ',' << w(t, j);
    out << '\n';
  }
}

void write_rho(const std::filesystem::path& path, const NoiseVector& rho) {
  static const char* names[kNumOutcomes] = {"00", "01", "10", "11", "-0", "-1", "0-", "1-"};
  auto out = open_output(path);
  out << "outcome,rho\n";
  for (int g = 0; g < kNumOutcomes; ++g) out << names[g] << ',' << rho[static_cast<std::size_t>(g)] << '\n';
}

void write_c_posterior(const std::filesystem::path& path, const CPosterior& post) {
  auto out = open_output(path);
  out << "C,probability\n";
  for (const auto& [c, p] : post.prob) out << c << ',' << p << '\n';
}

void write_tree_posterior(const std::filesystem::path& path, const std::vector<TreePosteriorEntry>& post) {
  auto out = open_output(path);
  out << "tree,C,probability\n";
  for (const auto& e : post) out << '"' << e.tree.to_string() << "\"," << e.tree.size() << ',' << e.prob << '\n';
}

void write_telemetry(const std::filesystem::path& path, const Telemetry& tel) {
  auto out = open_output(path);
  out << "kind,index,temperature,proposed,accepted,rate\n";
  auto row = [&](const char* kind, std::size_t i, double temp, const MoveStats& s) {
    out << kind << ',' << i << ',' << temp << ',' << s.proposed << ',' << s.accepted << ',' << s.rate() << '\n';
  };
  for (std::size_t i = 0; i < tel.theta.size(); ++i) row("theta", i, tel.ladder[i], tel.theta[i]);
  for (std::size_t i = 0; i < tel.rho.size(); ++i) row("rho", i, tel.ladder[i], tel.rho[i]);
  for (std::size_t i = 0; i < tel.swaps.size(); ++i) row("swap", i, tel.ladder[i], tel.swaps[i]);
  row("transdim", 0, 1.0, tel.transdim);
}

void write_trace(const std::filesystem::path& path, const Telemetry& tel) {
  auto out = open_output(path);
  out << "iteration,C,log_lik,log_post\n";
  out.precision(12);
  for (std::size_t i = 0; i < tel.trace_C.size(); ++i) {
    out << i + 1 << ',' << tel.trace_C[i] << ',' << tel.trace_loglik[i] << ',' << tel.trace_logpost[i] << '\n';
  }
}

void write_residuals(const std::filesystem::path& path, const ReadCounts& resid, const CountsTable& table) {
  auto out = open_output(path);
  out << "sample_id,row_id";
  for (const char* c : kCountColumns) out << ',' << c;
  out << '\n';
  for (int t = 0; t < resid.samples(); ++t) {
    for (int k = 0; k < resid.pairs(); ++k) {
      out << table.samples[static_cast<std::size_t>(t)] << ',' << table.rows[static_cast<std::size_t>(k)];
      for (double v : resid.cell(t, k)) {
        out << ',';
        if (std::isfinite(v)) out << v;
        else out << "NA";
      }
      out << '\n';
    }
  }
}

void write_geweke(const std::filesystem::path& path, const GewekeReport& report) {
  auto out = open_output(path);
  out << "statistic,mean,prior_mean,prior_mean_se,spectral_density,z,p,note\n";
  for (const auto& r : report.results) {
    out << r.statistic.name() << ',' << r.mean << ',' << r.prior_mean << ',' << r.prior_mean_se << ','
        << r.spectral_density << ',';
    if (r.test.skipped) {
      out << "NA,NA," << r.test.note << '\n';
    } else {
      out << r.test.z << ',' << r.test.p << ",\n";
    }
  }
}

void write_draws(const std::filesystem::path& path, const PosteriorSamples& samples) {
  auto out = open_output(path);
  out.precision(17);
  out << "# variant " << to_string(samples.variant) << '\n';
  out << "iteration\tC\ttree\tlog_lik\tlog_post\tw\trho\tz\n";
  for (const auto& d : samples.draws) {
    out << d.iteration << '\t' << d.C() << '\t' << (d.tree ? d.tree->to_string() : std::string("-")) << '\t'
        << d.log_lik << '\t' << d.log_post << '\t' << d.w.rows() << 'x' << d.w.cols();
    for (double v : d.w.data()) out << ',' << v;
    out << '\t';
    for (int g = 0; g < kNumOutcomes; ++g) out << (g ? "," : "") << d.rho[static_cast<std::size_t>(g)];
    out << '\t' << d.z.pairs() << 'x' << d.z.subclones() << ':';
    for (int k = 0; k < d.z.pairs(); ++k) {
      for (int c = 0; c < d.z.subclones(); ++c) out << static_cast<char>('0' + d.z.index(k, c));
    }
    out << '\n';
  }
}

PosteriorSamples read_draws(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  PosteriorSamples s;
  std::string line;
  long lineno = 0;
  auto fail = [&](const std::string& what) { throw DataError(where(path, lineno) + what); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# variant ", 0) == 0) {
      try {
        s.variant = parse_model_variant(trim(line.substr(10)));
      } catch (const std::exception& e) {
        fail(e.what());
      }
      continue;
    }
    if (line.rfind("iteration", 0) == 0 || trim(line).empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 8) fail("expected 8 fields");
    PosteriorDraw d;
    try {
      d.iteration = std::stoi(f[0]);
      if (f[2] != "-") d.tree = TreeTopology::parse(f[2]);
      d.log_lik = std::stod(f[3]);
      d.log_post = std::stod(f[4]);
      int rows = 0;
      int cols = 0;
      char x = 0;
      std::istringstream w(f[5]);
      w >> rows >> x >> cols;
      d.w = Matrix(rows, cols);
      for (double& v : d.w.data()) {
        w >> x >> v;
        if (!w) fail("short weight list");
      }
      std::istringstream r(f[6]);
      for (int g = 0; g < kNumOutcomes; ++g) {
        if (g) r >> x;
        r >> d.rho[static_cast<std::size_t>(g)];
      }
      if (!r) fail("short noise vector");
      std::istringstream z(f[7]);
      int K = 0;
      int C = 0;
      z >> K >> x >> C >> x;
      std::string codes;
      z >> codes;
      if (static_cast<long>(codes.size()) != static_cast<long>(K) * C) fail("genotype string has the wrong length");
      d.z = GenotypeMatrix(K, C);
      for (int k = 0; k < K; ++k) {
        for (int c = 0; c < C; ++c) {
          const int q = codes[static_cast<std::size_t>(k) * C + c] - '0';
          if (q < 0 || q >= kNumGenotypes) fail("bad genotype code");
          d.z.set(k, c, GenotypeCode::from_index(q));
        }
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
    s.draws.push_back(std::move(d));
  }
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

}  // namespace pairclone
