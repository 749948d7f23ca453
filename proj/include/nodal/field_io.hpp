#pragma once

#include <string>
#include <string_view>

#include "nodal/fields.hpp"

namespace nodal {

/// JSON document mirroring FieldSpec:
///   {"type": "trig",   "dim": 2, "terms": [{"k": [1, 0], "a": 1, "b": 0}, ...]}
///   {"type": "sph",    "terms": [{"l": 1, "m": 0, "c": 1}, ...]}
///   {"type": "random", "dim": 2, "max_freq": 3, "seed": 42, "scale": 1}
///   {"type": "poly",   "dim": 1, "terms": [{"e": [1], "c": 1}, ...]}
std::string to_json(const FieldSpec& spec, int indent = -1);
FieldSpec field_from_json(std::string_view text);

/// Inline mini-syntax, one ';'-separated group per term:
///   trig:[k=(1,0),a=1,b=0;k=(0,0),a=0.1]
///   sph:[l=2,m=0,c=1]
///   random:[dim=2,max_freq=3,seed=42,scale=1]
///   poly:[e=1,c=1;e=0,c=-0.5]
/// A string starting with '{' is parsed as JSON. Throws ConfigError naming the
/// offending key on malformed input.
FieldSpec parse_field(std::string_view text);

FieldSpec load_field_file(const std::string& path);

}  // namespace nodal
