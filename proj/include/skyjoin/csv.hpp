// skyjoin/csv.hpp - RFC-4180 reader/writer with a null/empty-string distinction
//
// An unquoted empty field is NULL; a quoted empty field ("") is the empty
// string.  That convention round-trips every table this engine can hold.
#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "skyjoin/errors.hpp"

namespace skyjoin::csv {

struct Field {
    std::string text;
    bool quoted = false;
    std::size_t line = 0;  // 1-based position of the field start
    std::size_t col = 0;

    bool is_null() const { return !quoted && text.empty(); }
};

class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads one record; returns false on clean EOF.  Throws CsvParseError on
    /// a malformed quote structure or a stray character after a closing quote.
    bool next(std::vector<Field>& out);

    /// Line the last returned record started on.
    std::size_t record_line() const { return record_line_; }

  private:
    int get();
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t col_ = 0;
    std::size_t record_line_ = 0;
};

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    /// Writes one record.  A field is quoted when it contains a comma, quote,
    /// CR or LF, or when it is an empty string that must not read back as
    /// NULL.  Pass quoted=false with empty text to emit NULL.
    void write(const std::vector<Field>& fields);

  private:
    std::ostream& out_;
};

}  // namespace skyjoin::csv
