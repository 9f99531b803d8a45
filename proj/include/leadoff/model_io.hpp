#pragma once

// Coefficient file loading. The file is JSON with exactly these keys:
//
//   {
//     "covariates": "raw" | "centered",
//     "covariate_means": {"sprint_speed": ..., "arm_strength": ...},
//     "po_attempt":  {"intercept": ..., "fixed": {...}, "re_sd": {...}, "re": {...}},
//     "po_success":  {...}, "sb_attempt": {...}, "sb_success": {...}
//   }
//
// Each model block's "fixed" object must carry exactly the terms its kind
// defines; "re_sd" must name exactly the roles its kind defines; "re" may
// carry fitted per-player effects for a subset of those roles. Anything
// unrecognized is an error, not a warning: silently ignored coefficients have
// bitten people before.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "leadoff/errors.hpp"
#include "leadoff/logistic_models.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                         const std::set<std::string>& required, const std::string& where) {
  if (!obj.is_object()) throw data_error("coefficient file: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw data_error("coefficient file: unknown key '" + it.key() + "' in " + where);
  for (const auto& k : required)
    if (!obj.count(k))
      throw data_error("coefficient file: missing key '" + k + "' in " + where);
}

inline double number_at(const nlohmann::json& obj, const std::string& key,
                        const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw data_error("coefficient file: " + where + "." + key + " must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d))
    throw data_error("coefficient file: " + where + "." + key + " must be finite");
  return d;
}

inline std::set<std::string> fixed_terms_for(ModelKind k) {
  switch (k) {
    case ModelKind::po_attempt:
      return {"balls", "strikes", "outs", "diseng_1", "diseng_2", "lead"};
    case ModelKind::po_success:
      return {"lead"};
    case ModelKind::sb_attempt:
      return {"balls", "strikes", "outs", "diseng_1", "diseng_2", "sprint_speed",
              "arm_strength"};
    case ModelKind::sb_success:
      return {"lead", "sprint_speed", "arm_strength"};
  }
  throw contract_error("fixed_terms_for: bad kind");
}

inline std::set<std::string> roles_for(ModelKind k) {
  if (kind_has_covariates(k)) return {"runner", "pitcher", "catcher"};
  return {"pitcher"};
}

inline Role role_from_string(const std::string& s) {
  if (s == "runner") return Role::runner;
  if (s == "pitcher") return Role::pitcher;
  if (s == "catcher") return Role::catcher;
  throw data_error("coefficient file: unknown role '" + s + "'");
}

inline LogisticModel parse_model(const nlohmann::json& block, ModelKind kind,
                                 const std::string& where) {
  require_keys(block, {"intercept", "fixed", "re_sd", "re"},
               {"intercept", "fixed", "re_sd"}, where);
  LogisticModel m;
  m.kind = kind;
  m.intercept = number_at(block, "intercept", where);

  auto terms = fixed_terms_for(kind);
  require_keys(block.at("fixed"), terms, terms, where + ".fixed");
  auto term = [&](const char* name) { return number_at(block.at("fixed"), name, where); };
  if (terms.count("balls")) m.b_balls = term("balls");
  if (terms.count("strikes")) m.b_strikes = term("strikes");
  if (terms.count("outs")) m.b_outs = term("outs");
  if (terms.count("diseng_1")) m.b_diseng1 = term("diseng_1");
  if (terms.count("diseng_2")) m.b_diseng2 = term("diseng_2");
  if (terms.count("lead")) m.b_lead = term("lead");
  if (terms.count("sprint_speed")) m.b_speed = term("sprint_speed");
  if (terms.count("arm_strength")) m.b_arm = term("arm_strength");

  auto roles = roles_for(kind);
  require_keys(block.at("re_sd"), roles, roles, where + ".re_sd");
  for (const auto& r : roles) {
    double sd = number_at(block.at("re_sd"), r, where + ".re_sd");
    if (sd < 0) throw data_error("coefficient file: negative sd in " + where + ".re_sd");
    m.re_sd[role_from_string(r)] = sd;
  }

  if (block.count("re")) {
    const auto& re = block.at("re");
    require_keys(re, roles, {}, where + ".re");
    for (auto it = re.begin(); it != re.end(); ++it) {
      Role role = role_from_string(it.key());
      if (!it.value().is_object())
        throw data_error("coefficient file: " + where + ".re." + it.key() +
                         " must map player ids to effects");
      for (auto p = it.value().begin(); p != it.value().end(); ++p)
        m.re[role][p.key()] = number_at(it.value(), p.key(), where + ".re." + it.key());
    }
  }
  return m;
}

}  // namespace detail

inline ModelSet parse_model_set(const nlohmann::json& root) {
  detail::require_keys(root,
                       {"covariates", "covariate_means", "po_attempt", "po_success",
                        "sb_attempt", "sb_success"},
                       {"covariates", "covariate_means", "po_attempt", "po_success",
                        "sb_attempt", "sb_success"},
                       "top level");
  ModelSet ms;
  std::string conv = root.at("covariates").is_string()
                         ? root.at("covariates").get<std::string>()
                         : throw data_error("coefficient file: covariates must be a string");
  if (conv == "centered")
    ms.centered_covariates = true;
  else if (conv == "raw")
    ms.centered_covariates = false;
  else
    throw data_error("coefficient file: covariates must be 'raw' or 'centered'");

  detail::require_keys(root.at("covariate_means"), {"sprint_speed", "arm_strength"},
                       {"sprint_speed", "arm_strength"}, "covariate_means");
  ms.mean_sprint_speed = detail::number_at(root.at("covariate_means"), "sprint_speed",
                                           "covariate_means");
  ms.mean_arm_strength = detail::number_at(root.at("covariate_means"), "arm_strength",
                                           "covariate_means");

  ms.po_attempt = detail::parse_model(root.at("po_attempt"), ModelKind::po_attempt,
                                      "po_attempt");
  ms.po_success = detail::parse_model(root.at("po_success"), ModelKind::po_success,
                                      "po_success");
  ms.sb_attempt = detail::parse_model(root.at("sb_attempt"), ModelKind::sb_attempt,
                                      "sb_attempt");
  ms.sb_success = detail::parse_model(root.at("sb_success"), ModelKind::sb_success,
                                      "sb_success");
  for (LogisticModel* m : {&ms.po_attempt, &ms.po_success, &ms.sb_attempt, &ms.sb_success}) {
    m->centered_covariates = ms.centered_covariates;
    m->mean_speed = ms.mean_sprint_speed;
    m->mean_arm = ms.mean_arm_strength;
  }
  return ms;
}

inline ModelSet load_model_set(const std::string& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error("coefficient file: " + path + ": " + e.what());
  }
  return parse_model_set(root);
}

}  // namespace leadoff
