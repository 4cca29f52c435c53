#pragma once

// Configuration-driven dispatch: named model factories, named verifiers with
// per-entry overrides, a serialized run document with a fixed key order, and
// CSV field exports.  Everything here is deterministic for a fixed config and
// seed; wall-clock timings never enter the serialized bytes.

#include <anoflow/verify.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace anoflow {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "anoflow";
inline constexpr const char* tool_version = "1.0.0";

// --- config -----------------------------------------------------------------

struct ExportSpec {
  std::string field;
  std::string path;
  int n = 8;  // lattice resolution per axis
};

struct RunConfig {
  std::string model_name;
  ordered_json model_params = ordered_json::object();
  std::uint64_t seed = 9001;
  GridSpec grid;  // default sampling grid; per-verifier entries may override
  std::vector<ordered_json> verifiers;  // validated entries, in listed order
  std::string report_path;              // empty = standard output
  std::vector<ExportSpec> exports;
  int verbosity = 1;
};

namespace detail {

inline std::string json_type_name(const ordered_json& v) {
  return std::string(v.type_name());
}

inline void require_object(const ordered_json& v, const std::string& where) {
  if (!v.is_object())
    throw ConfigError(where + ": expected an object, got " + json_type_name(v));
}

inline void require_keys(const ordered_json& obj,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || (it.key() == k);
    if (!ok) {
      std::string msg = where + ": unknown key \"" + it.key() + "\" (allowed:";
      for (const auto& k : allowed) msg += " " + k;
      throw ConfigError(msg + ")");
    }
  }
}

inline double param_number(const ordered_json& p, const std::string& key,
                           double fallback, double lo, double hi,
                           const std::string& where) {
  if (!p.contains(key)) return fallback;
  const ordered_json& v = p.at(key);
  if (!v.is_number())
    throw ConfigError(where + "." + key + ": expected a number, got " +
                      json_type_name(v));
  const double x = v.get<double>();
  if (!(std::isfinite(x) && x >= lo && x <= hi)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s.%s: %g outside [%g, %g]",
                  where.c_str(), key.c_str(), x, lo, hi);
    throw ConfigError(buf);
  }
  return x;
}

inline int param_int(const ordered_json& p, const std::string& key,
                     int fallback, int lo, int hi, const std::string& where) {
  if (!p.contains(key)) return fallback;
  const ordered_json& v = p.at(key);
  if (!v.is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer, got " +
                      json_type_name(v));
  const long long x = v.get<long long>();
  if (x < lo || x > hi) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s.%s: %lld outside [%d, %d]",
                  where.c_str(), key.c_str(), x, lo, hi);
    throw ConfigError(buf);
  }
  return static_cast<int>(x);
}

inline std::string param_choice(const ordered_json& p, const std::string& key,
                                const std::string& fallback,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
  if (!p.contains(key)) return fallback;
  const ordered_json& v = p.at(key);
  if (!v.is_string())
    throw ConfigError(where + "." + key + ": expected a string, got " +
                      json_type_name(v));
  const std::string s = v.get<std::string>();
  for (const auto& a : allowed)
    if (s == a) return s;
  std::string msg = where + "." + key + ": \"" + s + "\" not one of {";
  for (std::size_t i = 0; i < allowed.size(); ++i)
    msg += (i ? ", " : "") + allowed[i];
  throw ConfigError(msg + "}");
}

inline std::vector<double> param_number_list(const ordered_json& p,
                                             const std::string& key,
                                             const std::vector<double>& fallback,
                                             double lo, double hi,
                                             const std::string& where) {
  if (!p.contains(key)) return fallback;
  const ordered_json& v = p.at(key);
  if (!v.is_array() || v.empty())
    throw ConfigError(where + "." + key + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(where + "." + key + ": entries must be numbers");
    const double x = e.get<double>();
    if (!(std::isfinite(x) && x >= lo && x <= hi)) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s.%s: entry %g outside [%g, %g]",
                    where.c_str(), key.c_str(), x, lo, hi);
      throw ConfigError(buf);
    }
    out.push_back(x);
  }
  return out;
}

inline GridSpec param_grid(const ordered_json& p, const GridSpec& fallback,
                           const std::string& where) {
  if (!p.contains("grid")) return fallback;
  const ordered_json& g = p.at("grid");
  require_object(g, where + ".grid");
  require_keys(g, {"n", "random_samples"}, where + ".grid");
  GridSpec out = fallback;  // keeps the run seed
  out.n = param_int(g, "n", fallback.n, 2, 512, where + ".grid");
  out.random_samples = param_int(g, "random_samples", fallback.random_samples,
                                 0, 200000, where + ".grid");
  return out;
}

inline std::uint64_t param_seed(const ordered_json& p, const std::string& key,
                                std::uint64_t fallback,
                                const std::string& where) {
  if (!p.contains(key)) return fallback;
  const ordered_json& v = p.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

// --- model registry ---------------------------------------------------------

struct ModelInfo {
  std::string summary;
  std::function<FlowModel(const ordered_json&)> make;
};

inline const std::map<std::string, ModelInfo>& model_registry() {
  static const std::map<std::string, ModelInfo> reg = {
      {"cat_suspension",
       {"mapping torus of the hyperbolic toral map [[2,1],[1,1]] with "
        "closed-form invariant frame; parameters: none",
        [](const ordered_json& params) {
          detail::require_keys(params, {}, "model.parameters");
          return cat_suspension();
        }}},
      {"t3_pA",
       {"rotating-kernel pair on the 3-torus; parameters: m (int in "
        "[-64,-1]), n (int in [1,64]), eps, eps2 in (0,1) with eps != eps2",
        [](const ordered_json& params) {
          detail::require_keys(params, {"m", "n", "eps", "eps2"},
                               "model.parameters");
          const int m =
              detail::param_int(params, "m", -1, -64, -1, "model.parameters");
          const int n =
              detail::param_int(params, "n", 1, 1, 64, "model.parameters");
          const double eps = detail::param_number(params, "eps", 0.3, 1e-9,
                                                  1.0 - 1e-9, "model.parameters");
          const double eps2 = detail::param_number(
              params, "eps2", 0.6, 1e-9, 1.0 - 1e-9, "model.parameters");
          return t3_pA(m, n, eps, eps2);
        }}}};
  return reg;
}

inline FlowModel make_model(const RunConfig& cfg) {
  const auto it = model_registry().find(cfg.model_name);
  if (it == model_registry().end()) {
    std::string msg = "model.name: unknown model \"" + cfg.model_name +
                      "\" (available:";
    for (const auto& [name, info] : model_registry()) msg += " " + name;
    throw ConfigError(msg + ")");
  }
  return it->second.make(cfg.model_params);
}

// --- verifier registry ------------------------------------------------------

struct RunContext {
  FlowModel model;
  GridSpec grid;          // default grid carrying the run seed
  std::uint64_t seed = 9001;
  int workers = 1;
};

namespace detail {

// shared "where does the splitting come from" override block
inline const std::vector<std::string>& splitting_keys() {
  static const std::vector<std::string> keys = {"splitting", "T",
                                                "estimate_step", "fd_h"};
  return keys;
}

inline SplittingSource make_splitting(const RunContext& ctx,
                                      const ordered_json& p,
                                      const std::string& where) {
  const bool has_closed = ctx.model.e_s && ctx.model.e_u && ctx.model.alpha_s &&
                          ctx.model.alpha_u;
  std::string mode = param_choice(p, "splitting", "auto",
                                  {"auto", "closed_form", "estimated"}, where);
  if (mode == "auto") mode = has_closed ? "closed_form" : "estimated";
  if (mode == "closed_form") {
    if (!has_closed)
      throw ConfigError(where + ".splitting: model " + ctx.model.name +
                        " has no closed-form splitting; use \"estimated\"");
    return model_splitting(ctx.model);
  }
  const double T = param_number(p, "T", 20.0, 0.1, 1e4, where);
  LineEstimateOptions opts;
  opts.step = param_number(p, "estimate_step", opts.step, 1e-6, 1.0, where);
  const double fd_h = param_number(p, "fd_h", 1e-3, 1e-8, 1.0, where);
  return estimated_splitting(ctx.model, T, opts, fd_h);
}

// closed-form adapted frame when the model ships one, else the decomposition
// of alpha+ along the splitting directions
inline FrameDecomposition make_frame(const RunContext& ctx,
                                     const SplittingSource& split,
                                     const std::string& where) {
  const FlowModel& m = ctx.model;
  if (m.alpha_s && m.alpha_u && m.alpha_X && m.e_s && m.e_u)
    return {*m.alpha_s, *m.alpha_u, *m.alpha_X, *m.e_s, *m.e_u};
  if (!m.alpha_plus)
    throw ConfigError(where + ": model " + m.name +
                      " has neither a closed-form frame nor alpha_plus");
  return decompose_along_splitting(m, *m.alpha_plus, split.e_s, split.e_u,
                                   PairSign::positive);
}

inline std::vector<std::string> with_splitting(std::vector<std::string> keys) {
  for (const auto& k : splitting_keys()) keys.push_back(k);
  return keys;
}

}  // namespace detail

struct VerifierInfo {
  std::string summary;
  std::vector<std::string> keys;  // allowed override keys besides "id"
  // dry_run = true extracts and validates every parameter, then returns an
  // empty report without touching the heavy evaluation path; parse-time
  // validation runs exactly the code the real run will.
  std::function<VerificationReport(const RunContext&, const ordered_json&,
                                   bool dry_run)>
      run;
};

inline const std::map<std::string, VerifierInfo>& verifier_registry() {
  using detail::param_choice;
  using detail::param_grid;
  using detail::param_int;
  using detail::param_number;
  using detail::param_number_list;
  using detail::param_seed;
  static const std::map<std::string, VerifierInfo> reg = {
      {"metric1",
       {"divergence of a matched volume form equals the sum of the stable and "
        "unstable growth rates",
        detail::with_splitting({"grid", "tol", "volume"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[metric1]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const double tol = param_number(p, "tol", 1e-8, 1e-15, 1.0, where);
          const std::string vol = param_choice(p, "volume", "invariant",
                                               {"invariant", "reference"}, where);
          if (vol == "invariant" && !ctx.model.invariant_volume)
            throw ConfigError(where + ".volume: model " + ctx.model.name +
                              " has no invariant volume; use \"reference\"");
          const ThreeForm Omega = vol == "invariant"
                                      ? *ctx.model.invariant_volume
                                      : ctx.model.reference_volume;
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          if (dry_run) return VerificationReport{};
          return verify_divergence_identity(ctx.model, Omega, split, grid, tol,
                                            ctx.workers);
        }}},
      {"contcomp",
       {"adapted contact-volume and divergence identities: alpha ^ d(alpha) = "
        "+/-(r_u - r_s) vol_alpha and div vol_alpha = r_u + r_s",
        detail::with_splitting({"grid", "form", "wedge_tol", "div_tol"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[contcomp]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const std::string form =
              param_choice(p, "form", "plus", {"plus", "minus"}, where);
          const double wedge_tol =
              param_number(p, "wedge_tol", 1e-9, 1e-15, 1.0, where);
          const double div_tol =
              param_number(p, "div_tol", 1e-8, 1e-15, 1.0, where);
          const auto& alpha =
              form == "plus" ? ctx.model.alpha_plus : ctx.model.alpha_minus;
          if (!alpha)
            throw ConfigError(where + ".form: model " + ctx.model.name +
                              " has no closed-form alpha_" + form);
          const PairSign sign =
              form == "plus" ? PairSign::positive : PairSign::negative;
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          if (dry_run) return VerificationReport{};
          return verify_contcomp_volcomp(ctx.model, *alpha, sign, split, grid,
                                         wedge_tol, div_tol, ctx.workers);
        }}},
      {"contchar",
       {"strict contact-volume inequalities for alpha_plus, equivalent to "
        "r_s < 0 < r_u (hyperbolic domination)",
        detail::with_splitting({"grid", "margin_tol"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[contchar]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const double margin_tol =
              param_number(p, "margin_tol", 1e-6, 1e-15, 1.0, where);
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          if (dry_run) return VerificationReport{};
          return verify_contchar(ctx.model, split, grid, margin_tol,
                                 ctx.workers);
        }}},
      {"claims",
       {"flow-averaged form family: unstable pairing invariant, stable "
        "pairing decaying at the rate gap",
        detail::with_splitting(
            {"horizons", "step", "n_samples", "seed"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[claims]";
          const std::vector<double> Ts = param_number_list(
              p, "horizons", {1.0, 2.0, 3.0}, 1e-3, 100.0, where);
          const double step = param_number(p, "step", 1e-3, 1e-6, 1.0, where);
          const int n_samples =
              param_int(p, "n_samples", 12, 1, 100000, where);
          const std::uint64_t seed = param_seed(p, "seed", ctx.seed, where);
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          const FrameDecomposition fr = detail::make_frame(ctx, split, where);
          if (dry_run) return VerificationReport{};
          return verify_prop_claims(ctx.model, fr, Ts, step, n_samples, seed,
                                    ctx.workers);
        }}},
      {"reeb",
       {"volume-preserving bi-contact construction with the positive Reeb "
        "field lying in the negative kernel",
        detail::with_splitting({"grid", "inclusion_tol"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[reeb]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const double inclusion_tol =
              param_number(p, "inclusion_tol", 1e-6, 1e-15, 1.0, where);
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          if (dry_run) return VerificationReport{};
          return verify_reeb_construction(ctx.model, split, grid,
                                          inclusion_tol, ctx.workers);
        }}},
      {"push",
       {"closed orbits pushed by the positive Reeb field stay Legendrian for "
        "the positive kernel and transverse to the negative kernel",
        detail::with_splitting({"grid", "inclusion_tol", "orbit", "s_values",
                                "n_loop", "step", "tol"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[push]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const double inclusion_tol =
              param_number(p, "inclusion_tol", 1e-6, 1e-15, 1.0, where);
          const std::vector<double> s_values = param_number_list(
              p, "s_values", {0.01, 0.02, 0.05}, 1e-6, 10.0, where);
          const int n_loop = param_int(p, "n_loop", 256, 8, 100000, where);
          const double step = param_number(p, "step", 1e-3, 1e-6, 1.0, where);
          const double tol = param_number(p, "tol", 1e-6, 1e-15, 1.0, where);
          std::string orbit;
          if (p.contains("orbit")) {
            if (!p.at("orbit").is_string())
              throw ConfigError(where + ".orbit: expected a string");
            orbit = p.at("orbit").get<std::string>();
          } else if (!ctx.model.named_orbits.empty()) {
            orbit = ctx.model.named_orbits.front().label;
          } else {
            throw ConfigError(where + ": model " + ctx.model.name +
                              " has no named orbits to push");
          }
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          if (dry_run) return VerificationReport{};
          const VolumePreservingPair vp =
              volume_preserving_pair(ctx.model, split.e_s, split.e_u, grid,
                                     inclusion_tol, ctx.workers);
          return verify_legendrian_push(ctx.model, vp, orbit, s_values, n_loop,
                                        step, tol, ctx.workers);
        }}},
      {"cartan",
       {"structure equations of the adapted pair: Reeb frame expansions, "
        "coefficient relations, flow-derivative identity, loop integrals",
        detail::with_splitting({"grid", "tol", "fd_step"}),
        [](const RunContext& ctx, const ordered_json& p, bool dry_run) {
          const std::string where = "verifiers[cartan]";
          const GridSpec grid = param_grid(p, ctx.grid, where);
          const double tol = param_number(p, "tol", 1e-8, 1e-15, 1.0, where);
          const double fd_step =
              param_number(p, "fd_step", 1e-3, 1e-6, 1.0, where);
          if (!ctx.model.alpha_plus || !ctx.model.alpha_minus)
            throw ConfigError(where + ": model " + ctx.model.name +
                              " lacks the closed-form alpha_plus/alpha_minus "
                              "pair");
          const SplittingSource split = detail::make_splitting(ctx, p, where);
          const FrameDecomposition fr = detail::make_frame(ctx, split, where);
          if (dry_run) return VerificationReport{};
          return verify_cartan_equations(ctx.model, *ctx.model.alpha_minus,
                                         *ctx.model.alpha_plus, fr, grid, tol,
                                         fd_step, ctx.workers);
        }}}};
  return reg;
}

// --- config loading ---------------------------------------------------------

namespace detail {

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text,
                              const std::string& source) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ":" +
                      std::to_string(detail::line_of_byte(text, e.byte)) +
                      ": " + e.what());
  }
  detail::require_object(doc, source);
  detail::require_keys(doc, {"model", "seed", "grid", "verifiers", "output"},
                       source);

  RunConfig cfg;
  if (!doc.contains("model"))
    throw ConfigError(source + ": missing required key \"model\"");
  const ordered_json& model = doc.at("model");
  detail::require_object(model, "model");
  detail::require_keys(model, {"name", "parameters"}, "model");
  if (!model.contains("name") || !model.at("name").is_string())
    throw ConfigError("model.name: expected a string");
  cfg.model_name = model.at("name").get<std::string>();
  if (model_registry().find(cfg.model_name) == model_registry().end()) {
    std::string msg =
        "model.name: unknown model \"" + cfg.model_name + "\" (available:";
    for (const auto& [name, info] : model_registry()) msg += " " + name;
    throw ConfigError(msg + ")");
  }
  if (model.contains("parameters")) {
    detail::require_object(model.at("parameters"), "model.parameters");
    cfg.model_params = model.at("parameters");
  }

  cfg.seed = detail::param_seed(doc, "seed", cfg.seed, source);
  cfg.grid = detail::param_grid(doc, cfg.grid, source);
  cfg.grid.seed = cfg.seed;

  if (!doc.contains("verifiers"))
    throw ConfigError(source + ": missing required key \"verifiers\"");
  const ordered_json& vers = doc.at("verifiers");
  if (!vers.is_array() || vers.empty())
    throw ConfigError("verifiers: expected a non-empty array");

  // construct the model once so parameter ranges and model compatibility are
  // rejected here rather than mid-run
  const FlowModel probe = [&] {
    try {
      return model_registry().at(cfg.model_name).make(cfg.model_params);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("model.parameters: ") + e.what());
    }
  }();
  const RunContext probe_ctx{probe, cfg.grid, cfg.seed, 1};

  for (std::size_t i = 0; i < vers.size(); ++i) {
    const std::string where = "verifiers[" + std::to_string(i) + "]";
    const ordered_json& entry = vers.at(i);
    detail::require_object(entry, where);
    if (!entry.contains("id") || !entry.at("id").is_string())
      throw ConfigError(where + ".id: expected a string");
    const std::string id = entry.at("id").get<std::string>();
    const auto it = verifier_registry().find(id);
    if (it == verifier_registry().end()) {
      std::string msg = where + ".id: unknown verifier \"" + id +
                        "\" (available:";
      for (const auto& [vid, info] : verifier_registry()) msg += " " + vid;
      throw ConfigError(msg + ")");
    }
    std::vector<std::string> allowed = it->second.keys;
    allowed.push_back("id");
    detail::require_keys(entry, allowed, "verifiers[" + id + "]");
    it->second.run(probe_ctx, entry, true);
    cfg.verifiers.push_back(entry);
  }

  if (doc.contains("output")) {
    const ordered_json& out = doc.at("output");
    detail::require_object(out, "output");
    detail::require_keys(out, {"report", "exports", "verbosity"}, "output");
    if (out.contains("report")) {
      if (!out.at("report").is_string())
        throw ConfigError("output.report: expected a string path");
      cfg.report_path = out.at("report").get<std::string>();
    }
    cfg.verbosity = detail::param_int(out, "verbosity", 1, 0, 2, "output");
    if (out.contains("exports")) {
      const ordered_json& exps = out.at("exports");
      if (!exps.is_array())
        throw ConfigError("output.exports: expected an array");
      for (std::size_t i = 0; i < exps.size(); ++i) {
        const std::string where = "output.exports[" + std::to_string(i) + "]";
        const ordered_json& e = exps.at(i);
        detail::require_object(e, where);
        detail::require_keys(e, {"field", "path", "n"}, where);
        ExportSpec spec;
        if (!e.contains("field") || !e.at("field").is_string())
          throw ConfigError(where + ".field: expected a string");
        spec.field = e.at("field").get<std::string>();
        if (!e.contains("path") || !e.at("path").is_string())
          throw ConfigError(where + ".path: expected a string");
        spec.path = e.at("path").get<std::string>();
        spec.n = detail::param_int(e, "n", 8, 2, 256, where);
        cfg.exports.push_back(spec);
      }
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

// --- run document -----------------------------------------------------------

// Key order is part of the output contract; runtime_seconds is deliberately
// not serialized so identical config + seed yields identical bytes.
inline ordered_json serialize_report(const VerificationReport& rep) {
  ordered_json j = ordered_json::object();
  j["id"] = rep.theorem_id;
  j["model"] = rep.model_name;
  j["frame"] = rep.frame_provenance;
  j["norm"] = rep.norm_provenance;
  j["parameters"] = rep.parameters;
  j["verdict"] = verdict_name(rep.verdict);
  ordered_json res = ordered_json::array();
  for (const auto& r : rep.residuals) {
    ordered_json e = ordered_json::object();
    e["name"] = r.name;
    e["value"] = r.value;
    e["tol"] = r.tol;
    e["worst_point"] = {r.worst_point.x(), r.worst_point.y(),
                        r.worst_point.z()};
    res.push_back(e);
  }
  j["residuals"] = res;
  ordered_json mar = ordered_json::array();
  for (const auto& m : rep.margins) {
    ordered_json e = ordered_json::object();
    e["name"] = m.name;
    e["value"] = m.value;
    e["floor"] = m.floor;
    e["worst_point"] = {m.worst_point.x(), m.worst_point.y(),
                        m.worst_point.z()};
    mar.push_back(e);
  }
  j["margins"] = mar;
  j["note"] = rep.note;
  return j;
}

struct RunOutcome {
  ordered_json document;
  int n_pass = 0;
  int n_fail = 0;
  int n_inconclusive = 0;
  bool all_pass() const { return n_fail == 0 && n_inconclusive == 0; }
  int exit_code() const { return all_pass() ? 0 : 1; }
};

inline RunOutcome run_verifiers(const RunConfig& cfg, int workers = 1,
                                std::ostream* progress = nullptr) {
  RunContext ctx{make_model(cfg), cfg.grid, cfg.seed, workers};
  RunOutcome out;
  ordered_json doc = ordered_json::object();
  doc["tool"] = {{"name", tool_name}, {"version", tool_version}};
  doc["model"] = {{"name", cfg.model_name}, {"parameters", cfg.model_params}};
  doc["seed"] = cfg.seed;
  doc["grid"] = {{"n", cfg.grid.n}, {"random_samples", cfg.grid.random_samples}};
  ordered_json reports = ordered_json::array();
  for (const auto& entry : cfg.verifiers) {
    const std::string id = entry.at("id").get<std::string>();
    const VerificationReport rep =
        verifier_registry().at(id).run(ctx, entry, false);
    switch (rep.verdict) {
      case Verdict::pass: ++out.n_pass; break;
      case Verdict::fail: ++out.n_fail; break;
      default: ++out.n_inconclusive; break;
    }
    if (progress) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " (%.2fs)", rep.runtime_seconds);
      *progress << "[" << tool_name << "] " << id << ": "
                << verdict_name(rep.verdict) << buf << "\n";
    }
    reports.push_back(serialize_report(rep));
  }
  doc["verifiers"] = reports;
  doc["summary"] = {{"pass", out.n_pass},
                    {"fail", out.n_fail},
                    {"inconclusive", out.n_inconclusive},
                    {"all_pass", out.all_pass()}};
  out.document = doc;
  return out;
}

inline std::string render_document(const ordered_json& doc) {
  return doc.dump(2) + "\n";
}

// --- CSV field export -------------------------------------------------------

inline const std::map<std::string, std::string>& export_field_registry() {
  static const std::map<std::string, std::string> reg = {
      {"r_s", "stable growth rate of the splitting"},
      {"r_u", "unstable growth rate of the splitting"},
      {"div", "divergence of the flow against the model volume"},
      {"contact_volume",
       "coefficient of alpha_plus ^ d(alpha_plus) in the chart volume"},
      {"domination_margin", "rate gap r_u - r_s of the splitting"}};
  return reg;
}

inline ScalarField export_field(const FlowModel& model,
                                const std::string& field) {
  if (export_field_registry().find(field) == export_field_registry().end()) {
    std::string msg = "unknown export field \"" + field + "\" (available:";
    for (const auto& [name, desc] : export_field_registry()) msg += " " + name;
    throw ConfigError(msg + ")");
  }
  if (field == "div") {
    const ThreeForm Omega = model.invariant_volume ? *model.invariant_volume
                                                   : model.reference_volume;
    return divergence(model.X, Omega);
  }
  if (field == "contact_volume") {
    if (!model.alpha_plus)
      throw ConfigError("export field contact_volume: model " + model.name +
                        " has no closed-form alpha_plus");
    return detail::coeff_field(contact_volume(*model.alpha_plus));
  }
  const bool has_closed =
      model.e_s && model.e_u && model.alpha_s && model.alpha_u;
  const SplittingSource split =
      has_closed ? model_splitting(model) : estimated_splitting(model, 20.0);
  if (field == "r_s") return split.r_s;
  if (field == "r_u") return split.r_u;
  return split.r_u - split.r_s;  // domination_margin
}

// Row-major lattice sweep (x slowest, z fastest) at full double precision.
inline std::string export_field_csv(const FlowModel& model,
                                    const std::string& field, int n) {
  if (n < 2 || n > 256)
    throw ConfigError("export lattice resolution outside [2, 256]");
  const ScalarField f = export_field(model, field);
  std::string out = "x,y,z,value\n";
  char row[160];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 p(static_cast<double>(i) / n, static_cast<double>(j) / n,
                     static_cast<double>(k) / n);
        std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g\n", p.x(),
                      p.y(), p.z(), f.value(p));
        out += row;
      }
  return out;
}

// --- registry listings ------------------------------------------------------

inline std::string list_models_text() {
  std::string out;
  for (const auto& [name, info] : model_registry())
    out += name + "\n  " + info.summary + "\n";
  return out;
}

inline std::string list_verifiers_text() {
  std::string out;
  for (const auto& [id, info] : verifier_registry()) {
    out += id + "\n  " + info.summary + "\n  overrides:";
    for (const auto& k : info.keys) out += " " + k;
    out += "\n";
  }
  return out;
}

}  // namespace anoflow
