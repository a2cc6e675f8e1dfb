#pragma once

#include "moqc/prism/ast.hpp"

#include <map>
#include <string>

namespace moqc::prism::detail {

using TypeEnv = std::map<std::string, ValueType>;

/// Type of `e` under `env`; throws UnknownIdentifier / TypeMismatch.
ValueType infer_type(const Expr& e, const TypeEnv& env, const std::string& context);

/// Whole-model checks run after parsing: unique names, declared identifiers, Boolean
/// guards, numeric probabilities and reward values, assignments to own variables only.
void typecheck(const ModelSpec& spec);

} // namespace moqc::prism::detail
