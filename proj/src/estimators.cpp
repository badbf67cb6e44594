#include "twfe/estimators.hpp"

#include <charconv>

#include "twfe/didm.hpp"
#include "twfe/error.hpp"
#include "twfe/regression.hpp"

namespace twfe {

std::string EstimatorId::name() const {
  switch (kind) {
    case Kind::Fe: return "fe";
    case Kind::Fd: return "fd";
    case Kind::Didm: return "didm";
    case Kind::Joiners: return "joiners";
    case Kind::Leavers: return "leavers";
    case Kind::Placebo: return "placebo_" + std::to_string(horizon);
  }
  return "unknown";
}

EstimatorId parse_estimator(const std::string& text) {
  using K = EstimatorId::Kind;
  if (text == "fe") return {K::Fe, 0};
  if (text == "fd") return {K::Fd, 0};
  if (text == "didm") return {K::Didm, 0};
  if (text == "joiners") return {K::Joiners, 0};
  if (text == "leavers") return {K::Leavers, 0};
  if (text == "placebo") return {K::Placebo, 1};
  if (text.rfind("placebo", 0) == 0) {
    std::string rest = text.substr(7);
    if (!rest.empty() && rest.front() == '_') rest.erase(0, 1);
    int k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && k >= 1) return {K::Placebo, k};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + text + "'");
}

std::vector<EstimatorId> parse_estimators(const std::string& text) {
  std::vector<EstimatorId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    const std::string token = text.substr(start, end == std::string::npos ? end : end - start);
    if (!token.empty()) {
      const EstimatorId id = parse_estimator(token);
      bool seen = false;
      for (const auto& e : out) seen |= e == id;
      if (!seen) out.push_back(id);
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no estimator requested");
  return out;
}

double compute_estimator(const CellTable& cells, const EstimatorId& id) {
  using K = EstimatorId::Kind;
  switch (id.kind) {
    case K::Fe: return beta_fe(cells).beta;
    case K::Fd: return beta_fd(cells).beta;
    case K::Didm: return did_m(cells).estimate;
    case K::Joiners: {
      const auto r = did_m(cells);
      if (!r.joiners_estimate) throw Error(ErrorCode::NoSwitchers, "no joiners");
      return *r.joiners_estimate;
    }
    case K::Leavers: {
      const auto r = did_m(cells);
      if (!r.leavers_estimate) throw Error(ErrorCode::NoSwitchers, "no leavers");
      return *r.leavers_estimate;
    }
    case K::Placebo: return did_m_placebo(cells, id.horizon).estimate;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown estimator");
}

std::optional<double> try_compute_estimator(const CellTable& cells, const EstimatorId& id) {
  try {
    return compute_estimator(cells, id);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::Collinear:
      case ErrorCode::NoSwitchers:
      case ErrorCode::NoPlaceboSwitchers:
      case ErrorCode::DegenerateNormalizer:
        return std::nullopt;
      default:
        throw;
    }
  }
}

}  // namespace twfe
