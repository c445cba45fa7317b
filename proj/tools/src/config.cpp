#include "agils/harness/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "agils/toy.hpp"

namespace agils::harness {

using nlohmann::json;

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Toy: return "toy";
    case ExperimentKind::Sgl: return "sgl";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Ablation: return "ablation";
    case ExperimentKind::Baseline: return "baseline";
  }
  return "?";
}

std::string_view to_string(ProblemKind k) { return k == ProblemKind::Toy ? "toy" : "sgl"; }

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) fail(path, "out of range");
  return static_cast<int>(i);
}

int get_positive_int(const json& v, const std::string& path) {
  const int i = get_int(v, path);
  if (i < 1) fail(path, "must be at least 1");
  return i;
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

template <class Parse>
auto parse_enum(const json& v, const std::string& path, Parse parse) {
  const std::string s = get_string(v, path);
  try {
    return parse(s);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

SglSizes parse_sizes(const json& obj, const std::string& path, SglSizes out) {
  check_keys(obj, path, {"n_tr", "n_val", "n_test", "m", "snr"});
  if (obj.contains("n_tr")) out.n_tr = get_positive_int(obj["n_tr"], join(path, "n_tr"));
  if (obj.contains("n_val")) out.n_val = get_positive_int(obj["n_val"], join(path, "n_val"));
  if (obj.contains("n_test")) out.n_test = get_positive_int(obj["n_test"], join(path, "n_test"));
  if (obj.contains("m")) out.m = get_positive_int(obj["m"], join(path, "m"));
  if (obj.contains("snr")) out.snr = get_number(obj["snr"], join(path, "snr"));
  if (out.m % 5 != 0) fail(join(path, "m"), "must be divisible by 5");
  if (!(out.snr > 0.0)) fail(join(path, "snr"), "must be positive");
  return out;
}

int parse_toy_n(const json& v, const std::string& path) {
  const int n = get_int(v, path);
  if (n < 2 || n % 2 != 0) fail(path, "must be an even integer >= 2");
  return n;
}

// Byte offset -> "line:column" (1-based) for syntax errors.
std::string locate(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

AgilsConfig apply_agils_overrides(AgilsConfig c, const json& o) {
  const std::string p = "agils";
  check_keys(o, p,
             {"gamma", "epsilon", "eta", "p0", "rho_p", "c_p", "c_y", "c_ytilde", "c_alpha", "c_beta", "s0",
              "p_s", "tau0", "p_tau", "variant", "near_exact_target", "inner_method", "inner_max_iter",
              "ll_max_iter", "stop_rule", "tol", "rel_tol", "t_tol", "metric_tol", "max_outer",
              "strict_gamma", "record_timing", "trace_flush_every"});
  auto num = [&](const char* key, double& field) {
    if (o.contains(key)) field = get_number(o[key], join(p, key));
  };
  auto opt = [&](const char* key, std::optional<double>& field) {
    if (!o.contains(key)) return;
    if (o[key].is_null()) {
      field.reset();
    } else {
      field = get_number(o[key], join(p, key));
    }
  };
  auto integer = [&](const char* key, int& field) {
    if (o.contains(key)) field = get_int(o[key], join(p, key));
  };
  auto boolean = [&](const char* key, bool& field) {
    if (o.contains(key)) field = get_bool(o[key], join(p, key));
  };
  opt("gamma", c.gamma);
  opt("eta", c.eta);
  num("epsilon", c.epsilon);
  num("p0", c.p0);
  num("rho_p", c.rho_p);
  num("c_p", c.c_p);
  num("c_y", c.c_y);
  num("c_ytilde", c.c_ytilde);
  num("c_alpha", c.c_alpha);
  num("c_beta", c.c_beta);
  num("s0", c.s0);
  num("p_s", c.p_s);
  num("tau0", c.tau0);
  num("p_tau", c.p_tau);
  num("near_exact_target", c.near_exact_target);
  num("tol", c.tol);
  num("rel_tol", c.rel_tol);
  num("t_tol", c.t_tol);
  num("metric_tol", c.metric_tol);
  integer("inner_max_iter", c.inner_max_iter);
  integer("ll_max_iter", c.ll_max_iter);
  integer("max_outer", c.max_outer);
  integer("trace_flush_every", c.trace_flush_every);
  boolean("strict_gamma", c.strict_gamma);
  boolean("record_timing", c.record_timing);
  if (o.contains("variant")) c.variant = parse_enum(o["variant"], join(p, "variant"), parse_variant);
  if (o.contains("inner_method")) {
    c.inner_method = parse_enum(o["inner_method"], join(p, "inner_method"), parse_inner_method);
  }
  if (o.contains("stop_rule")) c.stop_rule = parse_enum(o["stop_rule"], join(p, "stop_rule"), parse_stop_rule);
  return c;
}

nlohmann::ordered_json to_json(const AgilsConfig& c) {
  nlohmann::ordered_json j;
  j["gamma"] = c.gamma ? json(*c.gamma) : json(nullptr);
  j["epsilon"] = c.epsilon;
  j["eta"] = c.eta ? json(*c.eta) : json(nullptr);
  j["p0"] = c.p0;
  j["rho_p"] = c.rho_p;
  j["c_p"] = c.c_p;
  j["c_y"] = c.c_y;
  j["c_ytilde"] = c.c_ytilde;
  j["c_alpha"] = c.c_alpha;
  j["c_beta"] = c.c_beta;
  j["s0"] = c.s0;
  j["p_s"] = c.p_s;
  j["tau0"] = c.tau0;
  j["p_tau"] = c.p_tau;
  j["variant"] = to_string(c.variant);
  j["near_exact_target"] = c.near_exact_target;
  j["inner_method"] = to_string(c.inner_method);
  j["inner_max_iter"] = c.inner_max_iter;
  j["ll_max_iter"] = c.ll_max_iter;
  j["stop_rule"] = to_string(c.stop_rule);
  j["tol"] = c.tol;
  j["rel_tol"] = c.rel_tol;
  j["t_tol"] = c.t_tol;
  j["metric_tol"] = c.metric_tol;
  j["max_outer"] = c.max_outer;
  j["strict_gamma"] = c.strict_gamma;
  j["record_timing"] = c.record_timing;
  j["trace_flush_every"] = c.trace_flush_every;
  return j;
}

ExperimentConfig parse_config_text(std::string_view text, ExperimentKind kind, std::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(std::string(source) + ":" + locate(text, at) + ": " + msg);
  }
  if (root.is_null()) root = json::object();

  ExperimentConfig cfg;
  cfg.kind = kind;
  check_keys(root, "",
             {"problem", "toy", "sgl", "sweep", "agils", "baseline", "metrics", "seeds", "variants",
              "inner_methods", "threads"});

  if (kind == ExperimentKind::Sgl) cfg.problem = ProblemKind::Sgl;
  if (kind == ExperimentKind::Baseline && root.contains("sgl") && !root.contains("toy")) {
    cfg.problem = ProblemKind::Sgl;
  }
  if (root.contains("problem")) {
    const std::string s = get_string(root["problem"], "problem");
    if (s == "toy") {
      cfg.problem = ProblemKind::Toy;
    } else if (s == "sgl") {
      cfg.problem = ProblemKind::Sgl;
    } else {
      fail("problem", "expected \"toy\" or \"sgl\"");
    }
    if (kind == ExperimentKind::Sgl && cfg.problem != ProblemKind::Sgl) fail("problem", "must be \"sgl\" here");
    if ((kind == ExperimentKind::Toy || kind == ExperimentKind::Ablation) && cfg.problem != ProblemKind::Toy) {
      fail("problem", "must be \"toy\" here");
    }
  }

  if (root.contains("toy")) {
    const json& t = root["toy"];
    check_keys(t, "toy", {"n"});
    if (t.contains("n")) cfg.toy_n = parse_toy_n(t["n"], "toy.n");
  }
  if (root.contains("sgl")) {
    json s = root["sgl"];
    if (!s.is_object()) fail("sgl", "expected an object");
    if (s.contains("rel_tol_scale")) {
      cfg.sgl_rel_tol_scale = get_number(s["rel_tol_scale"], "sgl.rel_tol_scale");
      if (!(cfg.sgl_rel_tol_scale > 0.0)) fail("sgl.rel_tol_scale", "must be positive");
      s.erase("rel_tol_scale");
    }
    cfg.sgl = parse_sizes(s, "sgl", cfg.sgl);
  }
  if (root.contains("sweep")) {
    const json& w = root["sweep"];
    check_keys(w, "sweep", {"toy_dims", "sgl_dims", "rel_tol_scale"});
    if (w.contains("toy_dims")) {
      if (!w["toy_dims"].is_array() || w["toy_dims"].empty()) fail("sweep.toy_dims", "expected a nonempty array");
      cfg.sweep.toy_dims.clear();
      for (std::size_t i = 0; i < w["toy_dims"].size(); ++i) {
        cfg.sweep.toy_dims.push_back(parse_toy_n(w["toy_dims"][i], "sweep.toy_dims[" + std::to_string(i) + "]"));
      }
    }
    if (w.contains("sgl_dims")) {
      if (!w["sgl_dims"].is_array() || w["sgl_dims"].empty()) fail("sweep.sgl_dims", "expected a nonempty array");
      cfg.sweep.sgl_dims.clear();
      for (std::size_t i = 0; i < w["sgl_dims"].size(); ++i) {
        cfg.sweep.sgl_dims.push_back(
            parse_sizes(w["sgl_dims"][i], "sweep.sgl_dims[" + std::to_string(i) + "]", SglSizes{}));
      }
    }
    if (w.contains("rel_tol_scale")) {
      cfg.sweep.rel_tol_scale = get_number(w["rel_tol_scale"], "sweep.rel_tol_scale");
      if (!(cfg.sweep.rel_tol_scale > 0.0)) fail("sweep.rel_tol_scale", "must be positive");
    }
  }
  if (root.contains("agils")) {
    cfg.agils = root["agils"];
    apply_agils_overrides(AgilsConfig{}, cfg.agils);  // type-check now, values are checked per run
  }
  if (root.contains("baseline")) {
    const json& b = root["baseline"];
    check_keys(b, "baseline", {"lo", "hi", "points", "budget", "ll_target", "ll_max_iter", "seed"});
    if (b.contains("lo")) cfg.baseline.lo = get_number(b["lo"], "baseline.lo");
    if (b.contains("hi")) cfg.baseline.hi = get_number(b["hi"], "baseline.hi");
    if (b.contains("points")) cfg.baseline.points = get_positive_int(b["points"], "baseline.points");
    if (b.contains("budget")) cfg.baseline.budget = get_positive_int(b["budget"], "baseline.budget");
    if (b.contains("ll_target")) cfg.baseline.ll_target = get_number(b["ll_target"], "baseline.ll_target");
    if (b.contains("ll_max_iter")) cfg.baseline.ll_max_iter = get_int(b["ll_max_iter"], "baseline.ll_max_iter");
    if (b.contains("seed")) {
      if (!b["seed"].is_number_unsigned()) fail("baseline.seed", "expected a nonnegative integer");
      cfg.baseline.seed = b["seed"].get<std::uint64_t>();
    }
    if (cfg.baseline.lo && cfg.baseline.hi && !(*cfg.baseline.lo < *cfg.baseline.hi)) {
      fail("baseline", "lo must be smaller than hi");
    }
    if (!(cfg.baseline.ll_target > 0.0)) fail("baseline.ll_target", "must be positive");
  }
  if (root.contains("metrics")) {
    const json& m = root["metrics"];
    check_keys(m, "metrics", {"ll_target", "envelope_target", "ll_max_iter"});
    if (m.contains("ll_target")) cfg.metrics.ll_target = get_number(m["ll_target"], "metrics.ll_target");
    if (m.contains("envelope_target")) {
      cfg.metrics.envelope_target = get_number(m["envelope_target"], "metrics.envelope_target");
    }
    if (m.contains("ll_max_iter")) cfg.metrics.ll_max_iter = get_int(m["ll_max_iter"], "metrics.ll_max_iter");
  }
  if (root.contains("seeds")) {
    const json& s = root["seeds"];
    if (!s.is_array() || s.empty()) fail("seeds", "expected a nonempty array");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned()) fail("seeds[" + std::to_string(i) + "]", "expected a nonnegative integer");
      cfg.seeds.push_back(s[i].get<std::uint64_t>());
    }
  }
  if (kind == ExperimentKind::Ablation) {
    cfg.variants = {InexactnessVariant::NearExact, InexactnessVariant::SingleStep, InexactnessVariant::Both};
  }
  if (root.contains("variants")) {
    const json& v = root["variants"];
    if (!v.is_array() || v.empty()) fail("variants", "expected a nonempty array");
    cfg.variants.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      cfg.variants.push_back(parse_enum(v[i], "variants[" + std::to_string(i) + "]", parse_variant));
    }
  }
  if (root.contains("inner_methods")) {
    const json& v = root["inner_methods"];
    if (!v.is_array() || v.empty()) fail("inner_methods", "expected a nonempty array");
    cfg.inner_methods.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      cfg.inner_methods.push_back(
          parse_enum(v[i], "inner_methods[" + std::to_string(i) + "]", parse_inner_method));
    }
  }
  if (root.contains("threads")) {
    cfg.threads = get_int(root["threads"], "threads");
    if (cfg.threads < 0) fail("threads", "must be nonnegative");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, ExperimentKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), kind, path.string());
}

AgilsConfig toy_config(const ExperimentConfig& cfg, int n) {
  return apply_agils_overrides(toy_default_config(n), cfg.agils);
}

AgilsConfig sgl_config(const ExperimentConfig& cfg, int m, double rel_tol_scale) {
  AgilsConfig base = sgl_default_config(m);
  base.rel_tol = rel_tol_scale / m;
  return apply_agils_overrides(base, cfg.agils);
}

}  // namespace agils::harness
