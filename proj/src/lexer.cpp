#include <algorithm>
#include <cctype>
#include <set>

#include "skyjoin/query.hpp"
#include "skyjoin/value.hpp"

namespace skyjoin::sql {

namespace {

const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "SELECT", "INTO",  "FROM",  "WHERE",  "CROSS", "JOIN",   "AS",
        "XMATCH", "MUST",  "MAY",   "NOT",    "ON",    "POINT",  "HAVING",
        "LIMIT",  "REGION", "CIRCLE", "AND",  "OR",    "IS",     "NULL",
        "BAYESIAN",
    };
    return kw;
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t col = 1;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };

    while (i < text.size()) {
        const char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        const SourcePos pos{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                ++j;
            }
            std::string word = text.substr(i, j - i);
            std::string upper = word;
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char ch) { return std::toupper(ch); });
            Token t;
            t.pos = pos;
            if (keywords().count(upper)) {
                t.kind = TokenKind::Keyword;
                t.text = upper;
            } else {
                t.kind = TokenKind::Ident;
                t.text = word;
            }
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    ++k;
                    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                        ++k;
                    }
                    j = k;
                }
            }
            const std::string lit = text.substr(i, j - i);
            double v = 0.0;
            if (!parse_double(lit, &v)) {
                throw LexError(pos, "malformed number '" + lit + "'");
            }
            Token t;
            t.kind = TokenKind::Number;
            t.text = lit;
            t.number = v;
            t.pos = pos;
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (c == '\'') {
            std::string value;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < text.size()) {
                if (text[j] == '\'') {
                    if (j + 1 < text.size() && text[j + 1] == '\'') {
                        value.push_back('\'');
                        j += 2;
                        continue;
                    }
                    closed = true;
                    ++j;
                    break;
                }
                value.push_back(text[j]);
                ++j;
            }
            if (!closed) throw LexError(pos, "unterminated string literal");
            Token t;
            t.kind = TokenKind::String;
            t.text = std::move(value);
            t.pos = pos;
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        auto symbol = [&](const std::string& s) {
            Token t;
            t.kind = TokenKind::Symbol;
            t.text = s;
            t.pos = pos;
            out.push_back(std::move(t));
            advance(s.size());
        };
        if (c == '<') {
            if (i + 1 < text.size() && text[i + 1] == '=') {
                symbol("<=");
            } else if (i + 1 < text.size() && text[i + 1] == '>') {
                symbol("<>");
            } else {
                symbol("<");
            }
            continue;
        }
        if (c == '>') {
            if (i + 1 < text.size() && text[i + 1] == '=') {
                symbol(">=");
            } else {
                symbol(">");
            }
            continue;
        }
        if (c == '!') {
            if (i + 1 < text.size() && text[i + 1] == '=') {
                symbol("!=");
                continue;
            }
            throw LexError(pos, "unexpected character '!'");
        }
        if (std::string("(),.:*/+-=").find(c) != std::string::npos) {
            symbol(std::string(1, c));
            continue;
        }
        throw LexError(pos, std::string("unexpected character '") + c + "'");
    }

    Token end;
    end.kind = TokenKind::End;
    end.text = "<end>";
    end.pos = SourcePos{line, col};
    out.push_back(std::move(end));
    return out;
}

const char* match_mode_name(MatchMode m) {
    switch (m) {
        case MatchMode::Must: return "MUST";
        case MatchMode::May: return "MAY";
        case MatchMode::Not: return "NOT";
    }
    return "?";
}

ExprPtr make_expr(Expr e) { return std::make_unique<Expr>(std::move(e)); }

}  // namespace skyjoin::sql
