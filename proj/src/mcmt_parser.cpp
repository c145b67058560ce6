#include <cctype>
#include <sstream>

#include "mlm/error.hpp"
#include "mlm/mcmt.hpp"

namespace mlm {

namespace {

enum class Tok { Id, Int, LBrace, RBrace, Colon, Equals, Arrow, Dollar, At, Minus, Star, LBracket, RBracket, DotDot, End };

const char* describe(Tok t) {
    switch (t) {
    case Tok::Id: return "identifier";
    case Tok::Int: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Arrow: return "'->'";
    case Tok::Dollar: return "'$'";
    case Tok::At: return "'@'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::DotDot: return "'..'";
    case Tok::End: return "end of input";
    }
    return "token";
}

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

[[noreturn]] void syntax_error(const SourcePos& pos, const std::string& message) {
    throw Error(ErrorKind::SyntaxError,
                std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message, pos.line, pos.column);
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        SourcePos pos{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Id, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j - i > 9) syntax_error(pos, "number too large");
            out.push_back({Tok::Int, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        Tok kind;
        std::size_t len = 1;
        switch (c) {
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case ':': kind = Tok::Colon; break;
        case '=': kind = Tok::Equals; break;
        case '$': kind = Tok::Dollar; break;
        case '@': kind = Tok::At; break;
        case '*': kind = Tok::Star; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case '-':
            if (i + 1 < src.size() && src[i + 1] == '>') {
                kind = Tok::Arrow;
                len = 2;
            } else {
                kind = Tok::Minus;
            }
            break;
        case '.':
            if (i + 1 < src.size() && src[i + 1] == '.') {
                kind = Tok::DotDot;
                len = 2;
                break;
            }
            [[fallthrough]];
        default: syntax_error(pos, std::string("unexpected character '") + c + "'");
        }
        out.push_back({kind, std::string(src.substr(i, len)), pos});
        advance(len);
    }
    out.push_back({Tok::End, "", SourcePos{line, col}});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ModuleSyntax module() {
        ModuleSyntax m;
        keyword("rules");
        m.name = expect(Tok::Id).text;
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) m.rules.push_back(rule());
        expect(Tok::RBrace);
        expect(Tok::End);
        return m;
    }

private:
    std::vector<Token> toks_;
    std::size_t p_ = 0;

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(p_ + ahead, toks_.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(const char* w) const { return at(Tok::Id) && peek().text == w; }

    const Token& expect(Tok k) {
        if (!at(k)) syntax_error(peek().pos, std::string("expected ") + describe(k) + ", found " + found());
        return toks_[p_++];
    }

    void keyword(const char* w) {
        if (!at_word(w)) syntax_error(peek().pos, std::string("expected '") + w + "', found " + found());
        ++p_;
    }

    std::string found() const {
        if (at(Tok::End)) return "end of input";
        return "'" + peek().text + "'";
    }

    RuleSyntax rule() {
        RuleSyntax r;
        r.pos = peek().pos;
        keyword("rule");
        r.name = expect(Tok::Id).text;
        expect(Tok::LBrace);
        keyword("meta");
        r.meta = block();
        keyword("from");
        r.from = block();
        keyword("to");
        r.to = block();
        expect(Tok::RBrace);
        return r;
    }

    std::vector<BlockItem> block() {
        std::vector<BlockItem> items;
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            const Token& name = expect(Tok::Id);
            if (at(Tok::Colon)) {
                ++p_;
                items.emplace_back(Declaration{name.text, type_expr(), name.pos});
            } else if (at(Tok::Equals)) {
                ++p_;
                std::string src = expect(Tok::Id).text;
                expect(Tok::Arrow);
                std::string tgt = expect(Tok::Id).text;
                items.emplace_back(Assignment{name.text, src, tgt, name.pos});
            } else {
                syntax_error(peek().pos, "expected ':' or '=' after '" + name.text + "', found " + found());
            }
        }
        expect(Tok::RBrace);
        return items;
    }

    unsigned natural() { return static_cast<unsigned>(std::stoul(expect(Tok::Int).text)); }

    TypeExpr type_expr() {
        TypeExpr t;
        t.name = expect(Tok::Id).text;
        if (at(Tok::Dollar)) {
            ++p_;
            t.constant = true;
        }
        if (at(Tok::Id) && peek().text.rfind("mm", 0) == 0) {
            const std::string& w = peek().text;
            std::string digits = w.substr(2);
            bool numeric = !digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos;
            if (w == "mm" && peek(1).kind == Tok::Int) {
                ++p_;
                t.level = static_cast<int>(natural());
            } else if (numeric) {
                if (digits.size() > 9) syntax_error(peek().pos, "level index too large");
                t.level = std::stoi(digits);
                ++p_;
            }
        }
        if (at(Tok::At)) {
            ++p_;
            Potency pot;
            pot.min = natural();
            pot.max = pot.min;
            if (at(Tok::Minus)) {
                ++p_;
                if (at(Tok::Star)) {
                    ++p_;
                    pot.max.reset();
                } else {
                    SourcePos pos = peek().pos;
                    pot.max = natural();
                    if (*pot.max < pot.min) syntax_error(pos, "potency upper bound below lower bound");
                }
            }
            t.potency = pot;
        }
        if (at(Tok::LBracket)) {
            ++p_;
            Multiplicity mu;
            mu.lower = natural();
            expect(Tok::DotDot);
            if (at(Tok::Star) || at_word("n")) {
                ++p_;
            } else {
                SourcePos pos = peek().pos;
                mu.upper = natural();
                if (*mu.upper < mu.lower) syntax_error(pos, "multiplicity upper bound below lower bound");
            }
            expect(Tok::RBracket);
            t.multiplicity = mu;
        }
        return t;
    }
};

void print_type(std::ostream& os, const TypeExpr& t) {
    os << t.name;
    if (t.constant) os << '$';
    if (t.level) os << " mm" << *t.level;
    if (t.potency) {
        os << " @" << t.potency->min;
        if (!t.potency->max)
            os << "-*";
        else if (*t.potency->max != t.potency->min)
            os << '-' << *t.potency->max;
    }
    if (t.multiplicity) {
        os << " [" << t.multiplicity->lower << "..";
        if (t.multiplicity->upper)
            os << *t.multiplicity->upper;
        else
            os << '*';
        os << ']';
    }
}

void print_block(std::ostream& os, const char* keyword, const std::vector<BlockItem>& items) {
    os << "    " << keyword << " {";
    if (items.empty()) {
        os << "}\n";
        return;
    }
    os << '\n';
    for (const auto& item : items) {
        os << "      ";
        if (const auto* d = std::get_if<Declaration>(&item)) {
            os << d->name << " : ";
            print_type(os, d->type);
        } else {
            const auto& a = std::get<Assignment>(item);
            os << a.arrow << " = " << a.source << " -> " << a.target;
        }
        os << '\n';
    }
    os << "    }\n";
}

} // namespace

ModuleSyntax parse_module_syntax(std::string_view text) { return Parser(lex(text)).module(); }

std::string print_module(const ModuleSyntax& m) {
    std::ostringstream os;
    os << "rules " << m.name << " {";
    if (m.rules.empty()) {
        os << "}\n";
        return os.str();
    }
    os << '\n';
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
        const auto& r = m.rules[i];
        if (i > 0) os << '\n';
        os << "  rule " << r.name << " {\n";
        print_block(os, "meta", r.meta);
        print_block(os, "from", r.from);
        print_block(os, "to", r.to);
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mlm
