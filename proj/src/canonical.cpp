// SPDX-License-Identifier: Apache-2.0

#include "pfv/canonical.hpp"

#include "pfv/util.hpp"

using nlohmann::json;

namespace pfv::dsl {

json expr_to_json(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::IntLit: return json{{"kind", "int"}, {"value", e.int_value}};
        case Expr::Kind::FieldRef: return json{{"kind", "field"}, {"name", e.field}};
        case Expr::Kind::TotalLen: return json{{"kind", "total_len"}};
        case Expr::Kind::Not:
            return json{{"kind", "not"}, {"arg", expr_to_json(*e.lhs)}};
        case Expr::Kind::Binary:
            return json{{"kind", "binary"},
                        {"op", bin_op_text(e.op)},
                        {"lhs", expr_to_json(*e.lhs)},
                        {"rhs", expr_to_json(*e.rhs)}};
    }
    return json();
}

static BinOp bin_op_from_text(const std::string& s) {
    if (s == "==") return BinOp::Eq;
    if (s == "!=") return BinOp::Ne;
    if (s == "<") return BinOp::Lt;
    if (s == "<=") return BinOp::Le;
    if (s == ">") return BinOp::Gt;
    if (s == ">=") return BinOp::Ge;
    if (s == "+") return BinOp::Add;
    if (s == "-") return BinOp::Sub;
    if (s == "*") return BinOp::Mul;
    if (s == "and") return BinOp::And;
    if (s == "or") return BinOp::Or;
    throw Error("schema", "unknown operator in canonical form: " + s);
}

ExprPtr expr_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw Error("schema", "expression node must be an object with a 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "int") return make_int(j.at("value").get<std::uint64_t>());
    if (kind == "field") return make_field(j.at("name").get<std::string>());
    if (kind == "total_len") return make_total_len();
    if (kind == "not") return make_not(expr_from_json(j.at("arg")));
    if (kind == "binary")
        return make_binary(bin_op_from_text(j.at("op").get<std::string>()),
                           expr_from_json(j.at("lhs")), expr_from_json(j.at("rhs")));
    throw Error("schema", "unknown expression kind: " + kind);
}

static json constraint_to_json(const Constraint& c) {
    return json{{"id", c.id}, {"expr", expr_to_json(*c.expr)}};
}

static Constraint constraint_from_json(const json& j) {
    Constraint c = make_constraint(expr_from_json(j.at("expr")));
    // The id is always recomputed from the expression; a stored id that
    // disagrees indicates a corrupted document.
    if (j.contains("id") && j.at("id").get<std::string>() != c.id)
        throw Error("schema", "constraint id does not match its expression");
    return c;
}

static json section_to_json(const Section& s);

static json body_to_json(const std::vector<Section>& body) {
    json arr = json::array();
    for (const auto& s : body) arr.push_back(section_to_json(s));
    return arr;
}

static json section_to_json(const Section& s) {
    switch (s.kind) {
        case Section::Kind::Record: {
            json fields = json::array();
            for (const auto& f : s.fields) {
                json type;
                if (f.type.kind == FieldType::Kind::UInt)
                    type = json{{"kind", "uint"}, {"bits", f.type.bits}};
                else
                    type = json{{"kind", "bytes"}, {"length", expr_to_json(*f.type.length)}};
                json cs = json::array();
                for (const auto& c : f.constraints) cs.push_back(constraint_to_json(c));
                fields.push_back(
                    json{{"name", f.name}, {"type", type}, {"constraints", cs}});
            }
            json checks = json::array();
            for (const auto& ac : s.checks)
                checks.push_back(json{{"after", ac.after_field},
                                      {"constraint", constraint_to_json(ac.constraint)}});
            return json{{"kind", "record"}, {"fields", fields}, {"checks", checks}};
        }
        case Section::Kind::Conditional:
            return json{{"kind", "conditional"},
                        {"guard", constraint_to_json(s.guard)},
                        {"body", body_to_json(s.body)}};
        case Section::Kind::Variant: {
            json arms = json::array();
            for (const auto& arm : s.arms)
                arms.push_back(json{{"tag", arm.tag}, {"body", body_to_json(arm.body)}});
            json out{{"kind", "variant"},
                     {"discriminator", s.discriminator},
                     {"arms", arms}};
            if (s.default_arm) out["default"] = body_to_json(*s.default_arm);
            return out;
        }
    }
    return json();
}

json spec_to_json(const FormatSpec& spec) {
    return json{{"schema_version", kSpecSchemaVersion},
                {"name", spec.name},
                {"sections", body_to_json(spec.sections)}};
}

std::string serialize_canonical(const FormatSpec& spec) {
    return spec_to_json(spec).dump(2) + "\n";
}

static Section section_from_json(const json& j);

static std::vector<Section> body_from_json(const json& j) {
    if (!j.is_array()) throw Error("schema", "section body must be an array");
    std::vector<Section> out;
    for (const auto& s : j) out.push_back(section_from_json(s));
    return out;
}

static Section section_from_json(const json& j) {
    Section s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "record") {
        s.kind = Section::Kind::Record;
        for (const auto& fj : j.at("fields")) {
            FieldDef f;
            f.name = fj.at("name").get<std::string>();
            const json& tj = fj.at("type");
            std::string tkind = tj.at("kind").get<std::string>();
            if (tkind == "uint") {
                f.type.kind = FieldType::Kind::UInt;
                f.type.bits = tj.at("bits").get<int>();
            } else if (tkind == "bytes") {
                f.type.kind = FieldType::Kind::Bytes;
                f.type.length = expr_from_json(tj.at("length"));
            } else {
                throw Error("schema", "unknown field type kind: " + tkind);
            }
            if (fj.contains("constraints"))
                for (const auto& cj : fj.at("constraints"))
                    f.constraints.push_back(constraint_from_json(cj));
            s.fields.push_back(std::move(f));
        }
        if (j.contains("checks"))
            for (const auto& cj : j.at("checks")) {
                AnchoredConstraint ac;
                ac.after_field = cj.at("after").get<std::size_t>();
                ac.constraint = constraint_from_json(cj.at("constraint"));
                if (ac.after_field > s.fields.size())
                    throw Error("schema", "check anchor out of range");
                s.checks.push_back(std::move(ac));
            }
        return s;
    }
    if (kind == "conditional") {
        s.kind = Section::Kind::Conditional;
        s.guard = constraint_from_json(j.at("guard"));
        s.body = body_from_json(j.at("body"));
        return s;
    }
    if (kind == "variant") {
        s.kind = Section::Kind::Variant;
        s.discriminator = j.at("discriminator").get<std::string>();
        for (const auto& aj : j.at("arms")) {
            VariantArm arm;
            arm.tag = aj.at("tag").get<std::uint64_t>();
            arm.body = body_from_json(aj.at("body"));
            s.arms.push_back(std::move(arm));
        }
        if (j.contains("default")) s.default_arm = body_from_json(j.at("default"));
        return s;
    }
    throw Error("schema", "unknown section kind: " + kind);
}

FormatSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw Error("schema", "canonical form must be a JSON object");
    if (j.contains("schema_version") &&
        j.at("schema_version").get<int>() != kSpecSchemaVersion)
        throw Error("schema", "unsupported schema_version");
    FormatSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.sections = body_from_json(j.at("sections"));
    return spec;
}

ParseResult spec_from_json_text(std::string_view text) {
    ParseResult result;
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        result.diagnostics.push_back(
            {Diagnostic::Severity::Error, "json-error", "input is not valid JSON", {}});
        return result;
    }
    try {
        result.spec = spec_from_json(j);
    } catch (const Error& e) {
        result.diagnostics.push_back(
            {Diagnostic::Severity::Error, "json-error", e.what(), {}});
    }
    return result;
}

std::string spec_digest(const FormatSpec& spec) {
    return digest_hex(serialize_canonical(spec));
}

}  // namespace pfv::dsl
