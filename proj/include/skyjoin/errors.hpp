// skyjoin/errors.hpp - error taxonomy shared by library, CLI and bindings
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skyjoin {

enum class ErrorCode {
    Config,
    Io,
    Lex,
    Syntax,
    UnknownDataset,
    UnknownAlias,
    UnknownColumn,
    AmbiguousColumn,
    TypeMismatch,
    MissingKey,
    UnboundSource,
    CsvParse,
    DuplicateKey,
    BadCoordinate,
    Domain,
    ZeroVector,
    Degenerate,
    Plan,
    Step,
    JobFailed,
    JobTimedOut,
    JobCancelled,
    UnknownJob,
};

/// Exit-code families used by the CLI (and documented in the README):
///   0 ok, 2 usage/config, 10 lex, 11 syntax, 20 name/type resolution,
///   30 ingest/io, 40 planning, 50 job failed, 52 timed out, 53 cancelled,
///   54 unknown job.
int exit_code_for(ErrorCode code);

const char* error_code_name(ErrorCode code);

class EngineError : public std::runtime_error {
  public:
    EngineError(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

/// Position inside a query or CSV text, 1-based.
struct SourcePos {
    std::size_t line = 0;
    std::size_t col = 0;
};

class LexError : public EngineError {
  public:
    LexError(SourcePos pos, const std::string& msg)
        : EngineError(ErrorCode::Lex, msg), pos_(pos) {}

    SourcePos pos() const { return pos_; }

  private:
    SourcePos pos_;
};

class SyntaxError : public EngineError {
  public:
    SyntaxError(SourcePos pos, const std::string& expected, const std::string& found,
                const std::string& msg)
        : EngineError(ErrorCode::Syntax, msg), pos_(pos), expected_(expected), found_(found) {}

    SourcePos pos() const { return pos_; }
    const std::string& expected() const { return expected_; }
    const std::string& found() const { return found_; }

  private:
    SourcePos pos_;
    std::string expected_;
    std::string found_;
};

class ResolveError : public EngineError {
  public:
    using EngineError::EngineError;
};

class CsvParseError : public EngineError {
  public:
    CsvParseError(SourcePos pos, const std::string& msg)
        : EngineError(ErrorCode::CsvParse, msg), pos_(pos) {}

    SourcePos pos() const { return pos_; }

  private:
    SourcePos pos_;
};

class DuplicateKeyError : public EngineError {
  public:
    explicit DuplicateKeyError(const std::string& key, const std::string& msg)
        : EngineError(ErrorCode::DuplicateKey, msg), key_(key) {}

    const std::string& key() const { return key_; }

  private:
    std::string key_;
};

class BadCoordinateError : public EngineError {
  public:
    BadCoordinateError(std::size_t line, const std::string& msg)
        : EngineError(ErrorCode::BadCoordinate, msg), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_ = 0;
};

class DomainError : public EngineError {
  public:
    explicit DomainError(const std::string& msg) : EngineError(ErrorCode::Domain, msg) {}
};

class ZeroVectorError : public EngineError {
  public:
    explicit ZeroVectorError(const std::string& msg) : EngineError(ErrorCode::ZeroVector, msg) {}
};

/// Raised when a weighted sum of detection directions cancels to (numerically)
/// zero, i.e. the tuple has no meaningful combined position.  Callers treat the
/// tuple as un-matchable rather than aborting the job.
class DegenerateConfiguration : public EngineError {
  public:
    explicit DegenerateConfiguration(const std::string& msg)
        : EngineError(ErrorCode::Degenerate, msg) {}
};

class ConfigError : public EngineError {
  public:
    explicit ConfigError(const std::string& msg) : EngineError(ErrorCode::Config, msg) {}
};

class IoError : public EngineError {
  public:
    explicit IoError(const std::string& msg) : EngineError(ErrorCode::Io, msg) {}
};

class PlanError : public EngineError {
  public:
    explicit PlanError(const std::string& msg) : EngineError(ErrorCode::Plan, msg) {}
};

class StepError : public EngineError {
  public:
    explicit StepError(const std::string& msg) : EngineError(ErrorCode::Step, msg) {}
};

class UnknownJobError : public EngineError {
  public:
    explicit UnknownJobError(const std::string& msg)
        : EngineError(ErrorCode::UnknownJob, msg) {}
};

}  // namespace skyjoin
