// SPDX-License-Identifier: Apache-2.0

#include "pfv/eval.hpp"

#include "pfv/util.hpp"

namespace pfv::dsl {

Value evaluate_int(const Expr& e, const Env& env, std::uint64_t total_len) {
    switch (e.kind) {
        case Expr::Kind::IntLit: return Value(e.int_value);
        case Expr::Kind::TotalLen: return Value(total_len);
        case Expr::Kind::FieldRef: {
            auto it = env.find(e.field);
            if (it == env.end())
                throw EvalError("unbound field reference: " + e.field, e.field);
            return Value(it->second);
        }
        case Expr::Kind::Binary:
            switch (e.op) {
                case BinOp::Add:
                    return evaluate_int(*e.lhs, env, total_len) +
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Sub:
                    return evaluate_int(*e.lhs, env, total_len) -
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Mul:
                    return evaluate_int(*e.lhs, env, total_len) *
                           evaluate_int(*e.rhs, env, total_len);
                default:
                    throw EvalError("boolean operator in integer position: " +
                                    std::string(bin_op_text(e.op)));
            }
        case Expr::Kind::Not:
            throw EvalError("'not' in integer position");
    }
    throw EvalError("malformed expression");
}

bool evaluate_bool(const Expr& e, const Env& env, std::uint64_t total_len) {
    switch (e.kind) {
        case Expr::Kind::Not: return !evaluate_bool(*e.lhs, env, total_len);
        case Expr::Kind::Binary:
            switch (e.op) {
                case BinOp::And:
                    return evaluate_bool(*e.lhs, env, total_len) &&
                           evaluate_bool(*e.rhs, env, total_len);
                case BinOp::Or:
                    return evaluate_bool(*e.lhs, env, total_len) ||
                           evaluate_bool(*e.rhs, env, total_len);
                case BinOp::Eq:
                    return evaluate_int(*e.lhs, env, total_len) ==
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Ne:
                    return evaluate_int(*e.lhs, env, total_len) !=
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Lt:
                    return evaluate_int(*e.lhs, env, total_len) <
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Le:
                    return evaluate_int(*e.lhs, env, total_len) <=
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Gt:
                    return evaluate_int(*e.lhs, env, total_len) >
                           evaluate_int(*e.rhs, env, total_len);
                case BinOp::Ge:
                    return evaluate_int(*e.lhs, env, total_len) >=
                           evaluate_int(*e.rhs, env, total_len);
                default:
                    throw EvalError("arithmetic operator in boolean position: " +
                                    std::string(bin_op_text(e.op)));
            }
            break;
        default:
            throw EvalError("integer expression in boolean position: " + expr_text(e));
    }
    throw EvalError("malformed expression");
}

bool evaluate_constraint(const Constraint& c, const Env& env, std::uint64_t total_len) {
    return evaluate_bool(*c.expr, env, total_len);
}

}  // namespace pfv::dsl
