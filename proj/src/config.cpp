#include "fsamp/config.hpp"

#include "fsamp/error.hpp"
#include "fsamp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace fsamp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::kConfig, "invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a finite number");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos == v.size()) return i;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "an integer");
}

int to_int(const std::string& key, const std::string& v) {
  const long long i = to_integer(key, v);
  if (i < -2147483647LL || i > 2147483647LL) bad_value(key, v, "a 32-bit integer");
  return static_cast<int>(i);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') bad_value(key, v, "a non-negative integer");
  try {
    std::size_t pos = 0;
    const auto u = std::stoull(v, &pos);
    if (pos == v.size()) return u;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a non-negative integer");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

Vec to_vec(const std::string& key, const std::string& v) {
  const auto items = split(v, ',');
  Vec out(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) out[static_cast<Eigen::Index>(i)] = to_double(key, items[i]);
  return out;
}

Mat to_mat(const std::string& key, const std::string& v) {
  const auto rows = split(v, ';');
  Mat out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vec row = to_vec(key, rows[r]);
    if (r == 0) out.resize(static_cast<Eigen::Index>(rows.size()), row.size());
    if (row.size() != out.cols()) bad_value(key, v, "rows of equal length separated by ';'");
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) out.push_back(to_int(key, item));
  return out;
}

std::string fmt(double d) {
  std::ostringstream os;
  os << std::setprecision(17) << d;
  return os.str();
}

std::string fmt(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string fmt(const Mat& m) {
  std::string s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) s += (r ? ";" : "") + fmt(Vec(m.row(r).transpose()));
  return s;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "," : "") << items[i];
  return os.str();
}

TargetKind kind_from_string(const std::string& v) {
  for (auto k : {TargetKind::kGmm, TargetKind::kDw4, TargetKind::kLennardJones, TargetKind::kVmfMixture}) {
    if (to_string(k) == v) return k;
  }
  bad_value("target.kind", v, "gmm, dw4, lj or vmf");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  std::string name;
  std::vector<TargetKind> kinds;  // empty: applies to every target
  Setter set;
  Getter get;
};

constexpr auto kGmm = TargetKind::kGmm;
constexpr auto kDw4 = TargetKind::kDw4;
constexpr auto kLj = TargetKind::kLennardJones;
constexpr auto kVmf = TargetKind::kVmfMixture;

#define FS_NUM(NAME, KINDS, FIELD)                                                      \
  Key {                                                                                 \
    NAME, KINDS, [](RunConfig& c, const std::string& k, const std::string& v) {         \
      c.FIELD = to_double(k, v);                                                        \
    },                                                                                  \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                 \
  }
#define FS_INT(NAME, KINDS, FIELD)                                                      \
  Key {                                                                                 \
    NAME, KINDS, [](RunConfig& c, const std::string& k, const std::string& v) {         \
      c.FIELD = to_int(k, v);                                                           \
    },                                                                                  \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                      \
  }
#define FS_BOOL(NAME, KINDS, FIELD)                                                     \
  Key {                                                                                 \
    NAME, KINDS, [](RunConfig& c, const std::string& k, const std::string& v) {         \
      c.FIELD = to_bool(k, v);                                                          \
    },                                                                                  \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }      \
  }

const std::vector<Key>& key_table() {
  using K = std::vector<TargetKind>;
  static const std::vector<Key> table = {
      {"experiment", {}, [](RunConfig& c, const std::string&, const std::string& v) { c.experiment = v; },
       [](const RunConfig& c) { return c.experiment; }},
      {"seed", {}, [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"out_dir", {}, [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir; }},
      {"target.kind", {},
       [](RunConfig& c, const std::string&, const std::string& v) { c.target.kind = kind_from_string(v); },
       [](const RunConfig& c) { return to_string(c.target.kind); }},

      {"target.centers", K{kGmm},
       [](RunConfig& c, const std::string& k, const std::string& v) { c.target.gmm.centers = to_mat(k, v); },
       [](const RunConfig& c) { return fmt(c.target.gmm.centers); }},
      {"target.weights", K{kGmm, kVmf},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         (c.target.kind == kGmm ? c.target.gmm.weights : c.target.vmf.weights) = to_vec(k, v);
       },
       [](const RunConfig& c) {
         return fmt(c.target.kind == kGmm ? c.target.gmm.weights : c.target.vmf.weights);
       }},
      FS_NUM("target.variance", K{kGmm}, target.gmm.variance),

      {"target.mus", K{kVmf},
       [](RunConfig& c, const std::string& k, const std::string& v) { c.target.vmf.mus = to_mat(k, v); },
       [](const RunConfig& c) { return fmt(c.target.vmf.mus); }},
      {"target.kappas", K{kVmf},
       [](RunConfig& c, const std::string& k, const std::string& v) { c.target.vmf.kappas = to_vec(k, v); },
       [](const RunConfig& c) { return fmt(c.target.vmf.kappas); }},

      {"target.n_particles", K{kDw4, kLj},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         (c.target.kind == kDw4 ? c.target.dw4.n_particles : c.target.lj.n_particles) = to_int(k, v);
       },
       [](const RunConfig& c) {
         return std::to_string(c.target.kind == kDw4 ? c.target.dw4.n_particles : c.target.lj.n_particles);
       }},
      {"target.spatial", K{kDw4, kLj},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         (c.target.kind == kDw4 ? c.target.dw4.spatial : c.target.lj.spatial) = to_int(k, v);
       },
       [](const RunConfig& c) {
         return std::to_string(c.target.kind == kDw4 ? c.target.dw4.spatial : c.target.lj.spatial);
       }},
      {"target.tau", K{kDw4, kLj},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         (c.target.kind == kDw4 ? c.target.dw4.tau : c.target.lj.tau) = to_double(k, v);
       },
       [](const RunConfig& c) { return fmt(c.target.kind == kDw4 ? c.target.dw4.tau : c.target.lj.tau); }},
      FS_NUM("target.a", K{kDw4}, target.dw4.a),
      FS_NUM("target.b", K{kDw4}, target.dw4.b),
      FS_NUM("target.c", K{kDw4}, target.dw4.c),
      FS_NUM("target.d0", K{kDw4}, target.dw4.d0),
      FS_NUM("target.rm", K{kLj}, target.lj.rm),
      FS_NUM("target.eps", K{kLj}, target.lj.eps),
      FS_NUM("target.osc_c", K{kLj}, target.lj.osc_c),
      FS_BOOL("target.standard_sign", K{kLj}, target.lj.standard_sign),

      FS_INT("train.outer_loops", K{}, train.outer_loops),
      FS_INT("train.inner_loops", K{}, train.inner_loops),
      FS_INT("train.batch_size", K{}, train.batch_size),
      FS_INT("train.buffer_capacity", K{}, train.buffer_capacity),
      FS_INT("train.new_samples_per_outer", K{}, train.new_samples_per_outer),
      FS_INT("train.nfe", K{}, train.nfe_train),
      {"train.gamma_mode", {},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "fixed") {
           c.train.gamma_mode = GammaMode::kFixed;
         } else if (v == "adaptive") {
           c.train.gamma_mode = GammaMode::kAdaptive;
         } else {
           bad_value(k, v, "fixed or adaptive");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.train.gamma_mode == GammaMode::kFixed ? "fixed" : "adaptive");
       }},
      FS_NUM("train.gamma", K{}, train.gamma),
      FS_NUM("train.gamma_c", K{}, train.gamma_c),
      FS_NUM("train.gamma_eps", K{}, train.gamma_eps),
      FS_NUM("train.clip_threshold", K{}, train.clip_threshold),
      FS_NUM("train.t_min", K{}, train.t_min),
      FS_NUM("train.lr", K{}, train.lr),
      FS_INT("train.checkpoint_every", K{}, checkpoint_every),
      FS_BOOL("train.log_wallclock", K{}, log_wallclock),

      {"model.hidden", {},
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.model.hidden = to_int_list(k, v); },
       [](const RunConfig& c) { return join(c.train.model.hidden); }},
      {"model.activation", {},
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.train.model.activation = activation_from_string(v);
         } catch (const Error&) {
           bad_value(k, v, "silu or tanh");
         }
       },
       [](const RunConfig& c) { return to_string(c.train.model.activation); }},
      FS_INT("model.time_features", K{}, train.model.time_features),

      FS_INT("sample.n", K{}, sample.n),
      FS_INT("sample.nfe", K{}, sample.nfe),

      {"eval.metrics", {},
       [](RunConfig& c, const std::string&, const std::string& v) { c.eval.metrics = split(v, ','); },
       [](const RunConfig& c) { return join(c.eval.metrics); }},
      FS_INT("eval.n_reference", K{}, eval.n_reference),
      FS_INT("eval.w2_subset", K{}, eval.w2_subset),
      FS_INT("eval.aligned_subset", K{}, eval.aligned_subset),
      FS_INT("eval.hist_bins", K{}, eval.hist_bins),
      FS_INT("eval.langevin_steps", K{}, eval.langevin.n_steps),
      FS_NUM("eval.langevin_step_size", K{}, eval.langevin.step_size),
      FS_INT("eval.langevin_thin", K{}, eval.langevin.thin),
      FS_NUM("eval.langevin_init_std", K{}, eval.langevin.init_std),
  };
  return table;
}

#undef FS_NUM
#undef FS_INT
#undef FS_BOOL

bool applies(const Key& key, TargetKind kind) {
  return key.kinds.empty() || std::find(key.kinds.begin(), key.kinds.end(), kind) != key.kinds.end();
}

void validate(const RunConfig& c) {
  try {
    c.train.validate();
    make_target(c.target);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (c.checkpoint_every < 0) throw Error(ErrorCode::kConfig, "train.checkpoint_every must be >= 0");
  if (c.sample.n < 0 || c.sample.nfe < 1) throw Error(ErrorCode::kConfig, "invalid sample.n or sample.nfe");
  if (c.eval.n_reference < 1 || c.eval.w2_subset < 1 || c.eval.aligned_subset < 1 ||
      c.eval.w2_subset > kMaxAssignmentSize || c.eval.aligned_subset > kMaxAssignmentSize) {
    throw Error(ErrorCode::kConfig, "eval subset sizes must lie in [1, 1024] and n_reference >= 1");
  }
  if (c.eval.hist_bins < 2) throw Error(ErrorCode::kConfig, "eval.hist_bins must be >= 2");
  for (const auto& h : c.train.model.hidden) {
    if (h < 1) throw Error(ErrorCode::kConfig, "model.hidden widths must be >= 1");
  }
  if (c.train.model.time_features < 0) throw Error(ErrorCode::kConfig, "model.time_features must be >= 0");
}

}  // namespace

GmmParams default_gmm_params() {
  GmmParams p;
  p.centers.resize(4, 2);
  p.centers << 3, 3, 3, -3, -3, 3, -3, -3;
  p.weights = Vec::Ones(4);
  p.variance = 1.0;
  return p;
}

VmfMixtureParams default_vmf_params() {
  VmfMixtureParams p;
  p.mus.resize(6, 3);
  p.mus << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  p.kappas = Vec::Constant(6, 50.0);
  p.weights = Vec::Ones(6);
  return p;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, std::pair<std::string, int>> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfig, where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = key_table();
    if (std::none_of(table.begin(), table.end(), [&](const Key& k) { return k.name == key; })) {
      throw Error(ErrorCode::kConfig, where + ": unknown key '" + key + "'");
    }
    if (entries.count(key)) throw Error(ErrorCode::kConfig, where + ": duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }
  for (const char* required : {"target.kind", "seed"}) {
    if (!entries.count(required)) {
      throw Error(ErrorCode::kConfig, origin + ": missing required key '" + std::string(required) + "'");
    }
  }

  RunConfig cfg;
  cfg.target.gmm = default_gmm_params();
  cfg.target.vmf = default_vmf_params();
  cfg.eval.langevin.n_steps = 20000;
  cfg.eval.langevin.step_size = 1e-3;
  for (const auto& key : key_table()) {
    if (key.name != "target.kind") continue;
    const auto& [value, ln] = entries.at(key.name);
    try {
      key.set(cfg, key.name, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, origin + ":" + std::to_string(ln) + ": " + e.what());
    }
  }
  for (const auto& key : key_table()) {
    const auto it = entries.find(key.name);
    if (it == entries.end() || key.name == "target.kind") continue;
    const auto& [value, ln] = it->second;
    const std::string where = origin + ":" + std::to_string(ln);
    if (!applies(key, cfg.target.kind)) {
      throw Error(ErrorCode::kConfig, where + ": key '" + key.name + "' does not apply to target.kind = " +
                                          to_string(cfg.target.kind));
    }
    try {
      key.set(cfg, key.name, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, where + ": " + e.what());
    }
  }
  cfg.train.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& key : key_table()) {
    if (!applies(key, cfg.target.kind)) continue;
    if (key.name == "eval.metrics" && cfg.eval.metrics.empty()) continue;
    const std::string v = key.get(cfg);
    if (v.empty() && key.name == "out_dir") continue;
    out += key.name + " = " + v + "\n";
  }
  return out;
}

TargetDensity make_target(const TargetConfig& cfg) {
  switch (cfg.kind) {
    case TargetKind::kGmm:
      return TargetDensity::gmm(cfg.gmm);
    case TargetKind::kDw4:
      return TargetDensity::dw4(cfg.dw4);
    case TargetKind::kLennardJones:
      return TargetDensity::lennard_jones(cfg.lj);
    case TargetKind::kVmfMixture:
      return TargetDensity::vmf_mixture(cfg.vmf);
  }
  throw Error(ErrorCode::kConfig, "unknown target kind");
}

std::vector<std::string> default_metrics(TargetKind kind) {
  switch (kind) {
    case TargetKind::kGmm:
      return {"energy_w2", "w2", "mode_weights", "jsd_2d"};
    case TargetKind::kDw4:
    case TargetKind::kLennardJones:
      return {"energy_w2", "energy_kl", "aligned_w2"};
    case TargetKind::kVmfMixture:
      return {"mode_weights", "w2"};
  }
  return {};
}

std::string resolved_out_dir(const RunConfig& cfg) {
  return cfg.out_dir.empty() ? "runs/" + cfg.experiment : cfg.out_dir;
}

}  // namespace fsamp
