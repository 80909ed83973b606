#include "ctk/json_io.hpp"

#include <cmath>
#include <string>

namespace ctk {

namespace {

double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(std::string(what) + ": non-finite entry");
  return v;
}

}  // namespace

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix: expected a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError("matrix: rows must be nonempty arrays");
  const auto cols = static_cast<Index>(j[0].size());
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InputError("matrix: ragged rows");
    }
    for (Index k = 0; k < cols; ++k) a(i, k) = finite_number(row[static_cast<std::size_t>(k)], "matrix");
  }
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("vector: expected a nonempty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = finite_number(j[i], "vector");
  return v;
}

Json to_json(const Matrix& a) {
  Json out = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Exponent exponent_from_string(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return Exponent::infinity();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("invalid norm exponent '" + s + "'");
  }
  if (used != s.size()) throw InputError("invalid norm exponent '" + s + "'");
  return Exponent::finite(p);
}

Json exponent_to_json(Exponent p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

NormSpec normspec_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("norm: expected an object");
  if (!j.contains("p")) throw InputError("norm: missing \"p\"");
  const Json& pj = j.at("p");
  Exponent p = pj.is_string() ? exponent_from_string(pj.get<std::string>())
                              : Exponent::finite(finite_number(pj, "norm.p"));
  if (!j.contains("weight")) return NormSpec::identity(p);
  const Json& w = j.at("weight");
  if (w.is_string()) {
    if (w.get<std::string>() == "identity") return NormSpec::identity(p);
    throw InputError("norm.weight: unknown weight '" + w.get<std::string>() + "'");
  }
  if (w.is_object() && w.contains("diag")) return NormSpec::diagonal(p, vector_from_json(w.at("diag")));
  if (w.is_object() && w.contains("general")) return NormSpec::general(p, matrix_from_json(w.at("general")));
  throw InputError("norm.weight: expected \"identity\", {\"diag\":[...]} or {\"general\":[[...]]}");
}

Json to_json(const NormSpec& ns) {
  Json out;
  out["p"] = exponent_to_json(ns.exponent());
  if (auto d = std::get_if<DiagonalWeight>(&ns.weight())) {
    out["weight"] = Json{{"diag", to_json(d->eta)}};
  } else if (auto g = std::get_if<GeneralWeight>(&ns.weight())) {
    out["weight"] = Json{{"general", to_json(g->r)}};
  } else {
    out["weight"] = "identity";
  }
  return out;
}

}  // namespace ctk
