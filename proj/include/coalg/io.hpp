// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/functor.hpp"

namespace coalg::io {

using Json = nlohmann::ordered_json;

/// TValue literals: {"id":x} {"c":a} {"pair":[v,w]} {"inl":v} {"inr":v}
/// {"fun":{"a":v}} {"set":[..]} {"dist":[[v,"1/2"],..]} {"nbhd":[[..],..]}.
/// The functor supplies the keys of tables.
Json to_json(const TValue& v, const Functor& t);
/// Throws ShapeError with a path on malformed literals.
TValue tvalue_from_json(const Json& j, const Functor& t, const std::string& path = {});

/// {"functor": text, "carrier": [...], "structure": {state: literal}}.
Json to_json(const Coalgebra& c);
Coalgebra coalgebra_from_json(const Json& j);

/// Text forms. Printing is canonical, so print . parse . print = print.
/// Errors are ParseError with line and column.
std::string write_coalgebra(const Coalgebra& c, bool pretty = false);
Coalgebra read_coalgebra(std::string_view text);

/// {"generators": [...], "relations": [["term","term"], ...]}.
Json to_json(const Presentation& p);
std::string write_presentation(const Presentation& p, bool pretty = false);
Presentation read_presentation(std::string_view text);

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace coalg::io
