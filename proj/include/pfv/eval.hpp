// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_EVAL_HPP
#define PFV_EVAL_HPP

#include <cstdint>
#include <map>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "pfv/ast.hpp"
#include "pfv/util.hpp"

namespace pfv::dsl {

// Arbitrary-precision integers keep the arithmetic exact; field values are
// bounded by their widths but sums and products are not.
using Value = boost::multiprecision::cpp_int;

using Env = std::map<std::string, std::uint64_t>;

class EvalError : public pfv::Error {
public:
    EvalError(const std::string& message, std::string missing = "")
        : pfv::Error("eval", message), missing_field_(std::move(missing)) {}
    const std::string& missing_field() const { return missing_field_; }

private:
    std::string missing_field_;
};

Value evaluate_int(const Expr& e, const Env& env, std::uint64_t total_len);
bool evaluate_bool(const Expr& e, const Env& env, std::uint64_t total_len);

// Standard entry point: every field referenced by the constraint must be
// bound in env; total_len is the packet byte count.
bool evaluate_constraint(const Constraint& c, const Env& env, std::uint64_t total_len);

}  // namespace pfv::dsl

#endif
