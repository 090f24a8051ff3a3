#include "rmt/spec_json.hpp"

#include "rmt/error.hpp"

namespace rmt {

ojson spec_to_json(const ProductSpec& spec) {
  ojson j;
  j["beta"] = spec.beta;
  j["N"] = spec.N;
  j["factors"] = ojson::array();
  for (const FactorSpec& f : spec.factors) {
    ojson fj;
    fj["kind"] = to_string(f.kind);
    fj["offset"] = f.offset;
    if (f.truncated()) fj["truncation"] = f.truncation;
    j["factors"].push_back(fj);
  }
  return j;
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw UsageError(std::string(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw UsageError(std::string(where) + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace

ProductSpec spec_from_json(const nlohmann::json& j) {
  check_keys(j, {"beta", "N", "factors"}, "spec");
  ProductSpec s;
  try {
    s.beta = j.at("beta").get<int>();
    s.N = j.at("N").get<int>();
    for (const auto& fj : j.at("factors")) {
      check_keys(fj, {"kind", "offset", "truncation"}, "factor");
      FactorSpec f;
      f.kind = factor_kind_from_string(fj.at("kind").get<std::string>());
      f.offset = fj.value("offset", 0);
      f.truncation = fj.value("truncation", 0);
      s.factors.push_back(f);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("spec: ") + e.what());
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return s;
}

}  // namespace rmt
