// SPDX-License-Identifier: Apache-2.0

#include "pfv/parse.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "pfv/canonical.hpp"

namespace pfv::dsl {

namespace {

enum class Tok {
    Ident, Int,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Colon, Semi, Comma,
    EqEq, Ne, Le, Ge, Lt, Gt, Plus, Minus, Star,
    End, Bad
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::uint64_t value = 0;
    SourceSpan span;
};

const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {"format", "where",   "if",  "switch",
                                             "case",   "default", "and", "or",
                                             "not",    "bytes",   "total_len"};
    return kw;
}

class Lexer {
public:
    Lexer(std::string_view src, std::vector<Diagnostic>& diags)
        : src_(src), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_ws();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

private:
    void error(const std::string& code, const std::string& msg, SourceSpan span) {
        diags_.push_back({Diagnostic::Severity::Error, code, msg, span});
    }

    char peek(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek())))
                advance();
            if (peek() == '#') {
                while (pos_ < src_.size() && peek() != '\n') advance();
                continue;
            }
            break;
        }
    }

    SourceSpan here() const { return {line_, col_, line_, col_}; }

    Token next() {
        if (pos_ >= src_.size()) return {Tok::End, "", 0, here()};
        SourceSpan start = here();
        char c = peek();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
                word.push_back(advance());
            start.end_line = line_;
            start.end_col = col_;
            return {Tok::Ident, word, 0, start};
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            int base = 10;
            if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
                advance();
                advance();
                base = 16;
            }
            while (std::isalnum(static_cast<unsigned char>(peek()))) num.push_back(advance());
            start.end_line = line_;
            start.end_col = col_;
            std::uint64_t value = 0;
            auto [ptr, ec] =
                std::from_chars(num.data(), num.data() + num.size(), value, base);
            if (ec == std::errc::result_out_of_range) {
                error("integer-too-large", "integer literal does not fit in 64 bits", start);
                return {Tok::Bad, num, 0, start};
            }
            if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
                error("lex-error", "malformed integer literal", start);
                return {Tok::Bad, num, 0, start};
            }
            return {Tok::Int, num, value, start};
        }

        advance();
        auto two = [&](char second, Tok yes, Tok no) {
            if (peek() == second) {
                advance();
                start.end_line = line_;
                start.end_col = col_;
                return yes;
            }
            start.end_line = line_;
            start.end_col = col_;
            return no;
        };

        switch (c) {
            case '{': return {Tok::LBrace, "{", 0, start};
            case '}': return {Tok::RBrace, "}", 0, start};
            case '(': return {Tok::LParen, "(", 0, start};
            case ')': return {Tok::RParen, ")", 0, start};
            case '[': return {Tok::LBracket, "[", 0, start};
            case ']': return {Tok::RBracket, "]", 0, start};
            case ':': return {Tok::Colon, ":", 0, start};
            case ';': return {Tok::Semi, ";", 0, start};
            case ',': return {Tok::Comma, ",", 0, start};
            case '+': return {Tok::Plus, "+", 0, start};
            case '-': return {Tok::Minus, "-", 0, start};
            case '*': return {Tok::Star, "*", 0, start};
            case '<': return {two('=', Tok::Le, Tok::Lt), "<", 0, start};
            case '>': return {two('=', Tok::Ge, Tok::Gt), ">", 0, start};
            case '=':
                if (peek() == '=') {
                    advance();
                    return {Tok::EqEq, "==", 0, start};
                }
                error("unknown-operator", "operator '=' is not part of the language; use '=='",
                      start);
                return {Tok::Bad, "=", 0, start};
            case '!':
                if (peek() == '=') {
                    advance();
                    return {Tok::Ne, "!=", 0, start};
                }
                error("unknown-operator", "operator '!' is not part of the language; use 'not'",
                      start);
                return {Tok::Bad, "!", 0, start};
            case '/':
            case '%':
            case '&':
            case '|':
            case '^':
            case '~':
                error("unknown-operator",
                      std::string("operator '") + c + "' is not part of the language", start);
                return {Tok::Bad, std::string(1, c), 0, start};
            default:
                error("lex-error", std::string("unexpected character '") + c + "'", start);
                return {Tok::Bad, std::string(1, c), 0, start};
        }
    }

    std::string_view src_;
    std::vector<Diagnostic>& diags_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

enum class ValueType { Int, Bool, Unknown };

// Scope chain used for declared-earlier resolution and opaque-field typing.
struct Scope {
    std::map<std::string, FieldType::Kind> names;
    Scope* parent = nullptr;

    const FieldType::Kind* find(const std::string& n) const {
        for (const Scope* s = this; s; s = s->parent) {
            auto it = s->names.find(n);
            if (it != s->names.end()) return &it->second;
        }
        return nullptr;
    }
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags, bool scoped)
        : toks_(std::move(toks)), diags_(diags), scoped_(scoped) {}

    std::optional<FormatSpec> parse_format() {
        FormatSpec spec;
        if (!expect_keyword("format")) return std::nullopt;
        Token name = cur();
        if (!expect(Tok::Ident, "format name")) return std::nullopt;
        if (keywords().count(name.text)) {
            error("reserved-name", "'" + name.text + "' cannot be used as a name", name.span);
        }
        spec.name = name.text;
        if (!expect(Tok::LBrace, "'{'")) return std::nullopt;
        Scope top;
        spec.sections = parse_items(Tok::RBrace, top);
        expect(Tok::RBrace, "'}'");
        if (cur().kind != Tok::End)
            error("syntax-error", "trailing input after format definition", cur().span);
        if (count_fields(spec.sections) == 0) {
            error("empty-record", "format '" + spec.name + "' declares no fields", name.span);
        }
        return spec;
    }

    ExprPtr parse_single_expr() {
        Scope top;
        ExprPtr e = parse_expr_top(top);
        if (cur().kind != Tok::End)
            error("syntax-error", "trailing input after expression", cur().span);
        return e;
    }

private:
    static std::size_t count_fields(const std::vector<Section>& body) {
        std::size_t n = 0;
        for (const auto& s : body) {
            switch (s.kind) {
                case Section::Kind::Record: n += s.fields.size(); break;
                case Section::Kind::Conditional: n += count_fields(s.body); break;
                case Section::Kind::Variant:
                    for (const auto& a : s.arms) n += count_fields(a.body);
                    if (s.default_arm) n += count_fields(*s.default_arm);
                    break;
            }
        }
        return n;
    }

    const Token& cur() const { return toks_[idx_]; }
    const Token& ahead(std::size_t n = 1) const {
        return toks_[std::min(idx_ + n, toks_.size() - 1)];
    }
    void bump() {
        if (idx_ + 1 < toks_.size()) ++idx_;
    }

    bool at_keyword(const char* kw) const {
        return cur().kind == Tok::Ident && cur().text == kw;
    }

    void error(const std::string& code, const std::string& msg, SourceSpan span) {
        diags_.push_back({Diagnostic::Severity::Error, code, msg, span});
    }

    bool expect(Tok kind, const char* what) {
        if (cur().kind == kind) {
            bump();
            return true;
        }
        error("syntax-error", std::string("expected ") + what, cur().span);
        return false;
    }

    bool expect_keyword(const char* kw) {
        if (at_keyword(kw)) {
            bump();
            return true;
        }
        error("syntax-error", std::string("expected '") + kw + "'", cur().span);
        return false;
    }

    // Skip to a likely statement boundary after a syntax error.
    void sync() {
        int depth = 0;
        while (cur().kind != Tok::End) {
            if (cur().kind == Tok::Semi && depth == 0) {
                bump();
                return;
            }
            if (cur().kind == Tok::LBrace) ++depth;
            if (cur().kind == Tok::RBrace) {
                if (depth == 0) return;
                --depth;
            }
            bump();
        }
    }

    std::vector<Section> parse_items(Tok closer, Scope& scope) {
        std::vector<Section> out;
        Section* open_record = nullptr;

        auto open = [&]() -> Section& {
            if (!open_record) {
                out.emplace_back();
                out.back().kind = Section::Kind::Record;
                open_record = &out.back();
            }
            return *open_record;
        };

        while (cur().kind != closer && cur().kind != Tok::End) {
            if (at_keyword("if")) {
                Section s = parse_conditional(scope);
                out.push_back(std::move(s));
                open_record = nullptr;
            } else if (at_keyword("switch")) {
                Section s = parse_variant(scope);
                out.push_back(std::move(s));
                open_record = nullptr;
            } else if (at_keyword("where")) {
                SourceSpan span = cur().span;
                bump();
                std::vector<ExprPtr> exprs = parse_constraint_list(scope);
                if (!expect(Tok::Semi, "';'")) sync();
                Section& rec = open();
                for (auto& e : exprs) {
                    AnchoredConstraint ac;
                    ac.after_field = rec.fields.size();
                    ac.constraint = make_constraint(e);
                    ac.constraint.span = span;
                    rec.checks.push_back(std::move(ac));
                }
            } else if (cur().kind == Tok::Ident) {
                std::optional<FieldDef> f = parse_field(scope);
                if (f) {
                    Section& rec = open();
                    rec.fields.push_back(std::move(*f));
                }
            } else {
                error("syntax-error", "expected a field, 'where', 'if' or 'switch'",
                      cur().span);
                sync();
                open_record = nullptr;
            }
        }
        return out;
    }

    std::optional<FieldDef> parse_field(Scope& scope) {
        FieldDef f;
        Token name = cur();
        bump();
        f.name = name.text;
        f.span = name.span;
        if (keywords().count(f.name)) {
            error("reserved-name", "'" + f.name + "' cannot be used as a field name",
                  name.span);
        }
        if (scoped_ && scope.find(f.name)) {
            error("duplicate-field", "field '" + f.name + "' is already declared", name.span);
        }
        if (!expect(Tok::Colon, "':'")) {
            sync();
            return std::nullopt;
        }

        if (at_keyword("bytes")) {
            bump();
            f.type.kind = FieldType::Kind::Bytes;
            if (!expect(Tok::LBracket, "'['")) {
                sync();
                return std::nullopt;
            }
            ExprPtr len = parse_expr_top(scope);
            require_type(len, ValueType::Int, "byte-array length", scope);
            f.type.length = len;
            if (!expect(Tok::RBracket, "']'")) {
                sync();
                return std::nullopt;
            }
        } else if (cur().kind == Tok::Ident && cur().text.size() >= 2 &&
                   cur().text[0] == 'u' &&
                   std::isdigit(static_cast<unsigned char>(cur().text[1]))) {
            std::uint64_t bits = 0;
            auto txt = cur().text;
            auto [p, ec] = std::from_chars(txt.data() + 1, txt.data() + txt.size(), bits);
            bool all = (ec == std::errc() && p == txt.data() + txt.size());
            if (!all || bits < 1 || bits > 64) {
                error("width-out-of-range",
                      "integer field width must be between 1 and 64 bits", cur().span);
                bits = bits < 1 ? 1 : 64;
            }
            f.type.kind = FieldType::Kind::UInt;
            f.type.bits = static_cast<int>(bits);
            bump();
        } else {
            error("syntax-error", "expected a type (uN or bytes[expr])", cur().span);
            sync();
            return std::nullopt;
        }

        // Field becomes visible to its own attached constraints.
        scope.names[f.name] = f.type.kind;

        if (at_keyword("where")) {
            SourceSpan where_span = cur().span;
            bump();
            std::vector<ExprPtr> exprs = parse_constraint_list(scope);
            for (auto& e : exprs) {
                Constraint c = make_constraint(e);
                c.span = where_span;
                f.constraints.push_back(std::move(c));
            }
        }
        if (!expect(Tok::Semi, "';'")) sync();
        return f;
    }

    std::vector<ExprPtr> parse_constraint_list(Scope& scope) {
        std::vector<ExprPtr> out;
        for (;;) {
            ExprPtr e = parse_expr_top(scope);
            require_type(e, ValueType::Bool, "constraint", scope);
            if (e) out.push_back(std::move(e));
            if (cur().kind == Tok::Comma) {
                bump();
                continue;
            }
            break;
        }
        return out;
    }

    Section parse_conditional(Scope& scope) {
        Section s;
        s.kind = Section::Kind::Conditional;
        s.span = cur().span;
        bump();  // if
        expect(Tok::LParen, "'('");
        ExprPtr guard = parse_expr_top(scope);
        require_type(guard, ValueType::Bool, "guard", scope);
        s.guard = make_constraint(guard ? guard : make_int(0));
        s.guard.span = s.span;
        expect(Tok::RParen, "')'");
        expect(Tok::LBrace, "'{'");
        Scope inner;
        inner.parent = &scope;
        s.body = parse_items(Tok::RBrace, inner);
        if (count_fields(s.body) == 0 && s.body.empty())
            error("empty-section", "conditional body is empty", s.span);
        expect(Tok::RBrace, "'}'");
        return s;
    }

    Section parse_variant(Scope& scope) {
        Section s;
        s.kind = Section::Kind::Variant;
        s.span = cur().span;
        bump();  // switch
        expect(Tok::LParen, "'('");
        Token disc = cur();
        if (expect(Tok::Ident, "discriminator field name")) {
            s.discriminator = disc.text;
            if (scoped_ && !scope.find(disc.text)) {
                error("undefined-field",
                      "discriminator '" + disc.text + "' does not name an earlier field",
                      disc.span);
            }
        }
        expect(Tok::RParen, "')'");
        expect(Tok::LBrace, "'{'");
        std::set<std::uint64_t> tags;
        while (cur().kind != Tok::RBrace && cur().kind != Tok::End) {
            if (at_keyword("case")) {
                bump();
                Token tag = cur();
                VariantArm arm;
                if (expect(Tok::Int, "arm tag")) {
                    arm.tag = tag.value;
                    if (!tags.insert(tag.value).second)
                        error("variant-duplicate-tag",
                              "duplicate arm tag " + std::to_string(tag.value), tag.span);
                }
                expect(Tok::Colon, "':'");
                expect(Tok::LBrace, "'{'");
                Scope inner;
                inner.parent = &scope;
                arm.body = parse_items(Tok::RBrace, inner);
                if (arm.body.empty())
                    error("empty-section",
                          "arm " + std::to_string(arm.tag) + " has an empty body", tag.span);
                expect(Tok::RBrace, "'}'");
                s.arms.push_back(std::move(arm));
            } else if (at_keyword("default")) {
                SourceSpan span = cur().span;
                bump();
                expect(Tok::Colon, "':'");
                expect(Tok::LBrace, "'{'");
                Scope inner;
                inner.parent = &scope;
                auto body = parse_items(Tok::RBrace, inner);
                if (body.empty()) error("empty-section", "default arm has an empty body", span);
                expect(Tok::RBrace, "'}'");
                if (s.default_arm)
                    error("syntax-error", "more than one default arm", span);
                s.default_arm = std::move(body);
            } else {
                error("syntax-error", "expected 'case' or 'default'", cur().span);
                sync();
            }
        }
        expect(Tok::RBrace, "'}'");
        if (s.arms.empty() && !s.default_arm)
            error("empty-section", "switch has no arms", s.span);
        return s;
    }

    // --- expressions ---

    ExprPtr parse_expr_top(Scope& scope) { return parse_or(scope); }

    ExprPtr parse_or(Scope& scope) {
        ExprPtr lhs = parse_and(scope);
        while (at_keyword("or")) {
            bump();
            ExprPtr rhs = parse_and(scope);
            if (!lhs || !rhs) return nullptr;
            lhs = make_binary(BinOp::Or, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_and(Scope& scope) {
        ExprPtr lhs = parse_not(scope);
        while (at_keyword("and")) {
            bump();
            ExprPtr rhs = parse_not(scope);
            if (!lhs || !rhs) return nullptr;
            lhs = make_binary(BinOp::And, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_not(Scope& scope) {
        if (at_keyword("not")) {
            bump();
            ExprPtr arg = parse_not(scope);
            if (!arg) return nullptr;
            return make_not(arg);
        }
        return parse_cmp(scope);
    }

    ExprPtr parse_cmp(Scope& scope) {
        ExprPtr lhs = parse_add(scope);
        BinOp op;
        switch (cur().kind) {
            case Tok::EqEq: op = BinOp::Eq; break;
            case Tok::Ne: op = BinOp::Ne; break;
            case Tok::Lt: op = BinOp::Lt; break;
            case Tok::Le: op = BinOp::Le; break;
            case Tok::Gt: op = BinOp::Gt; break;
            case Tok::Ge: op = BinOp::Ge; break;
            default: return lhs;
        }
        bump();
        ExprPtr rhs = parse_add(scope);
        if (!lhs || !rhs) return nullptr;
        return make_binary(op, lhs, rhs);
    }

    ExprPtr parse_add(Scope& scope) {
        ExprPtr lhs = parse_mul(scope);
        for (;;) {
            BinOp op;
            if (cur().kind == Tok::Plus)
                op = BinOp::Add;
            else if (cur().kind == Tok::Minus)
                op = BinOp::Sub;
            else
                break;
            bump();
            ExprPtr rhs = parse_mul(scope);
            if (!lhs || !rhs) return nullptr;
            lhs = make_binary(op, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_mul(Scope& scope) {
        ExprPtr lhs = parse_primary(scope);
        while (cur().kind == Tok::Star) {
            bump();
            ExprPtr rhs = parse_primary(scope);
            if (!lhs || !rhs) return nullptr;
            lhs = make_binary(BinOp::Mul, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_primary(Scope& scope) {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Int: {
                bump();
                auto e = make_int(t.value);
                return e;
            }
            case Tok::LParen: {
                bump();
                ExprPtr inner = parse_expr_top(scope);
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::Ident: {
                if (t.text == "total_len") {
                    bump();
                    return make_total_len();
                }
                if (keywords().count(t.text)) {
                    error("syntax-error", "unexpected '" + t.text + "' in expression", t.span);
                    bump();
                    return nullptr;
                }
                bump();
                if (scoped_) {
                    const FieldType::Kind* k = scope.find(t.text);
                    if (!k) {
                        error("undefined-field",
                              "'" + t.text +
                                  "' does not name a field declared earlier in the format",
                              t.span);
                    } else if (*k == FieldType::Kind::Bytes) {
                        error("opaque-field-ref",
                              "byte-array field '" + t.text +
                                  "' cannot be used in an expression",
                              t.span);
                    }
                }
                auto e = make_field(t.text);
                return e;
            }
            case Tok::Bad:
                bump();
                return nullptr;
            default:
                error("syntax-error", "expected an expression", t.span);
                bump();
                return nullptr;
        }
    }

    // --- type checking ---

    ValueType infer(const ExprPtr& e) {
        if (!e) return ValueType::Unknown;
        switch (e->kind) {
            case Expr::Kind::IntLit:
            case Expr::Kind::FieldRef:
            case Expr::Kind::TotalLen: return ValueType::Int;
            case Expr::Kind::Not: {
                ValueType a = infer(e->lhs);
                if (a == ValueType::Int)
                    error("type-error", "'not' needs a boolean operand", e->span);
                return ValueType::Bool;
            }
            case Expr::Kind::Binary: {
                ValueType a = infer(e->lhs);
                ValueType b = infer(e->rhs);
                switch (e->op) {
                    case BinOp::And:
                    case BinOp::Or:
                        if (a == ValueType::Int || b == ValueType::Int)
                            error("type-error",
                                  std::string("'") + bin_op_text(e->op) +
                                      "' needs boolean operands",
                                  e->span);
                        return ValueType::Bool;
                    case BinOp::Add:
                    case BinOp::Sub:
                    case BinOp::Mul:
                        if (a == ValueType::Bool || b == ValueType::Bool)
                            error("type-error",
                                  std::string("'") + bin_op_text(e->op) +
                                      "' needs integer operands",
                                  e->span);
                        return ValueType::Int;
                    default:
                        if (a == ValueType::Bool || b == ValueType::Bool)
                            error("type-error", "comparison needs integer operands", e->span);
                        return ValueType::Bool;
                }
            }
        }
        return ValueType::Unknown;
    }

    void require_type(const ExprPtr& e, ValueType want, const char* what, Scope&) {
        if (!e) return;
        ValueType got = infer(e);
        if (got == ValueType::Unknown || got == want) return;
        error("type-error",
              std::string(what) + " must be " +
                  (want == ValueType::Bool ? "a boolean expression" : "an integer expression"),
              e->span);
    }

    std::vector<Token> toks_;
    std::vector<Diagnostic>& diags_;
    bool scoped_;
    std::size_t idx_ = 0;
};

bool looks_like_json(std::string_view text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{';
    }
    return false;
}

}  // namespace

ParseResult parse_spec(std::string_view text) {
    if (looks_like_json(text)) return spec_from_json_text(text);

    ParseResult result;
    Lexer lexer(text, result.diagnostics);
    std::vector<Token> toks = lexer.run();
    Parser parser(std::move(toks), result.diagnostics, /*scoped=*/true);
    std::optional<FormatSpec> spec = parser.parse_format();
    if (spec && !has_errors(result.diagnostics)) result.spec = std::move(spec);
    return result;
}

ExprParseResult parse_expr(std::string_view text) {
    ExprParseResult result;
    Lexer lexer(text, result.diagnostics);
    std::vector<Token> toks = lexer.run();
    Parser parser(std::move(toks), result.diagnostics, /*scoped=*/false);
    ExprPtr e = parser.parse_single_expr();
    if (e && !has_errors(result.diagnostics)) result.expr = std::move(e);
    return result;
}

}  // namespace pfv::dsl
