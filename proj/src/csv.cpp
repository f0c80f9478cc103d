#include "skyjoin/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "skyjoin/value.hpp"

namespace skyjoin {

const char* column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Int64: return "int";
        case ColumnType::Float64: return "real";
        case ColumnType::Text: return "text";
    }
    return "?";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    double v = 0.0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        // from_chars rejects "inf"/"nan" spellings only on some libraries;
        // accept them explicitly so exports always read back.
        if (s == "inf") { *out = HUGE_VAL; return true; }
        if (s == "-inf") { *out = -HUGE_VAL; return true; }
        if (s == "nan") { *out = NAN; return true; }
        return false;
    }
    *out = v;
    return true;
}

bool parse_int(const std::string& s, std::int64_t* out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    std::int64_t v = 0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) return false;
    *out = v;
    return true;
}

}  // namespace skyjoin

namespace skyjoin::csv {

int Reader::get() {
    const int c = in_.get();
    if (c == '\n') {
        ++line_;
        col_ = 0;
    } else if (c != EOF) {
        ++col_;
    }
    return c;
}

bool Reader::next(std::vector<Field>& out) {
    out.clear();
    if (in_.peek() == EOF) return false;
    record_line_ = line_;

    Field field;
    field.line = line_;
    field.col = col_ + 1;
    bool in_quotes = false;
    bool was_quoted = false;
    bool after_close = false;

    auto push_field = [&]() {
        field.quoted = was_quoted;
        out.push_back(std::move(field));
        field = Field{};
        field.line = line_;
        field.col = col_ + 1;
        was_quoted = false;
        after_close = false;
    };

    for (;;) {
        const int ci = get();
        if (ci == EOF) {
            if (in_quotes) {
                throw CsvParseError({line_, col_}, "unterminated quoted field");
            }
            push_field();
            return true;
        }
        const char c = static_cast<char>(ci);
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    get();
                    field.text.push_back('"');
                } else {
                    in_quotes = false;
                    after_close = true;
                }
            } else {
                field.text.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (!field.text.empty() || was_quoted) {
                throw CsvParseError({field.line, field.col},
                                    "quote inside an unquoted field");
            }
            in_quotes = true;
            was_quoted = true;
            continue;
        }
        if (c == ',') {
            push_field();
            continue;
        }
        if (c == '\r') {
            if (in_.peek() == '\n') get();
            push_field();
            return true;
        }
        if (c == '\n') {
            push_field();
            return true;
        }
        if (after_close) {
            throw CsvParseError({field.line, field.col},
                                "content after a closing quote");
        }
        field.text.push_back(c);
    }
}

void Writer::write(const std::vector<Field>& fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out_ << ',';
        first = false;
        const bool needs_quotes =
            f.quoted ||
            f.text.find_first_of(",\"\r\n") != std::string::npos;
        if (!needs_quotes) {
            out_ << f.text;
            continue;
        }
        out_ << '"';
        for (char c : f.text) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    }
    out_ << '\n';
}

}  // namespace skyjoin::csv
