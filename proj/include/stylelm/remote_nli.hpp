#pragma once

// HTTP client for an NLI classification service.
//
//   POST /classify        {"premise": s, "hypothesis": s}
//                      -> {"contradiction": f, "neutral": f, "entailment": f}
//   POST /classify_batch  {"pairs": [[premise, hypothesis], ...]} -> {"verdicts": [...]}
//   GET  /health       -> {"status": "ok", "model": s}
//
// Network failures and 5xx answers raise ProviderError (the filter retries
// those); malformed bodies raise ProtocolError.

#include <httplib.h>

#include <chrono>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "stylelm/errors.hpp"
#include "stylelm/filter.hpp"

namespace stylelm {

inline constexpr double kVerdictSumTolerance = 1e-4;

inline std::string excerpt(const std::string& body, std::size_t n = 120) {
  return body.size() <= n ? body : body.substr(0, n) + "...";
}

inline nlohmann::json verdict_to_json(const NliVerdict& v) {
  return {{"contradiction", v.contradiction}, {"neutral", v.neutral}, {"entailment", v.entailment}};
}

inline NliVerdict verdict_from_json(const nlohmann::json& j, const std::string& body) {
  if (!j.is_object()) throw ProtocolError("verdict is not an object: " + excerpt(body));
  NliVerdict v;
  try {
    v.contradiction = j.at("contradiction").get<double>();
    v.neutral = j.at("neutral").get<double>();
    v.entailment = j.at("entailment").get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("verdict lacks numeric contradiction/neutral/entailment: " + excerpt(body));
  }
  if (!v.is_simplex(kVerdictSumTolerance)) throw ProtocolError("verdict is not a probability simplex: " + excerpt(body));
  return v;
}

struct HealthStatus {
  std::string status;
  std::string model;
};

class RemoteProvider final : public NliProvider {
 public:
  /// `endpoint` like "http://127.0.0.1:8080".
  explicit RemoteProvider(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}

  NliVerdict classify(const std::string& premise, const std::string& hypothesis) override {
    const nlohmann::json req = {{"premise", premise}, {"hypothesis", hypothesis}};
    const std::string body = post("/classify", req.dump());
    return verdict_from_json(parse(body), body);
  }

  std::vector<NliVerdict> classify_batch(const std::vector<std::pair<std::string, std::string>>& pairs) override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [p, h] : pairs) arr.push_back({p, h});
    const std::string body = post("/classify_batch", nlohmann::json{{"pairs", arr}}.dump());
    const auto j = parse(body);
    if (!j.contains("verdicts") || !j["verdicts"].is_array() || j["verdicts"].size() != pairs.size())
      throw ProtocolError("batch response does not carry one verdict per pair: " + excerpt(body));
    std::vector<NliVerdict> out;
    for (const auto& v : j["verdicts"]) out.push_back(verdict_from_json(v, body));
    return out;
  }

  HealthStatus health() {
    auto cli = client();
    auto res = cli.Get("/health");
    if (!res) throw ProviderError("nli service unreachable at " + endpoint_ + ": " + httplib::to_string(res.error()));
    const auto j = parse(res->body);
    HealthStatus h;
    h.status = j.value("status", "");
    h.model = j.value("model", "");
    if (res->status != 200) throw ProviderError("nli service not ready (HTTP " + std::to_string(res->status) + ")");
    return h;
  }

  std::string name() const override { return "remote:" + endpoint_; }
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  httplib::Client client() const {
    httplib::Client cli(endpoint_);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_write_timeout(timeout_);
    return cli;
  }

  std::string post(const std::string& path, const std::string& payload) const {
    auto cli = client();
    auto res = cli.Post(path, payload, "application/json");
    if (!res) throw ProviderError("nli service unreachable at " + endpoint_ + ": " + httplib::to_string(res.error()));
    if (res->status >= 500) throw ProviderError("nli service error HTTP " + std::to_string(res->status));
    if (res->status != 200)
      throw ProtocolError("HTTP " + std::to_string(res->status) + " from " + path + ": " + excerpt(res->body));
    return res->body;
  }

  static nlohmann::json parse(const std::string& body) {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("response is not JSON: " + excerpt(body));
    }
  }

  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

inline NliVerdict remote_classify(const std::string& premise, const std::string& hypothesis, const std::string& endpoint) {
  RemoteProvider p(endpoint);
  return p.classify(premise, hypothesis);
}

}  // namespace stylelm
