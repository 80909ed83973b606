#pragma once

#include "ctk/normcore.hpp"

#include <json.hpp>

namespace ctk {

using Json = nlohmann::json;

/// Row-major nested arrays, e.g. [[1,2],[3,4]]. Rejects ragged or non-finite input.
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);
Json to_json(const Matrix& a);
Json to_json(const Vector& v);

/// {"p": number|"inf", "weight": "identity"|{"diag":[...]}|{"general":[[...]]}}
NormSpec normspec_from_json(const Json& j);
Json to_json(const NormSpec& ns);

/// "inf", "infinity" or a number >= 1.
Exponent exponent_from_string(const std::string& s);
Json exponent_to_json(Exponent p);

}  // namespace ctk
