#include "skyjoin/errors.hpp"

namespace skyjoin {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
            return 2;
        case ErrorCode::Lex:
            return 10;
        case ErrorCode::Syntax:
            return 11;
        case ErrorCode::UnknownDataset:
        case ErrorCode::UnknownAlias:
        case ErrorCode::UnknownColumn:
        case ErrorCode::AmbiguousColumn:
        case ErrorCode::TypeMismatch:
        case ErrorCode::MissingKey:
        case ErrorCode::UnboundSource:
            return 20;
        case ErrorCode::Io:
        case ErrorCode::CsvParse:
        case ErrorCode::DuplicateKey:
        case ErrorCode::BadCoordinate:
            return 30;
        case ErrorCode::Domain:
        case ErrorCode::ZeroVector:
        case ErrorCode::Degenerate:
        case ErrorCode::Plan:
            return 40;
        case ErrorCode::Step:
        case ErrorCode::JobFailed:
            return 50;
        case ErrorCode::JobTimedOut:
            return 52;
        case ErrorCode::JobCancelled:
            return 53;
        case ErrorCode::UnknownJob:
            return 54;
    }
    return 1;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Lex: return "Lex";
        case ErrorCode::Syntax: return "Syntax";
        case ErrorCode::UnknownDataset: return "UnknownDataset";
        case ErrorCode::UnknownAlias: return "UnknownAlias";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::AmbiguousColumn: return "AmbiguousColumn";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::UnboundSource: return "UnboundSource";
        case ErrorCode::CsvParse: return "CsvParse";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::BadCoordinate: return "BadCoordinate";
        case ErrorCode::Domain: return "Domain";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::Plan: return "Plan";
        case ErrorCode::Step: return "Step";
        case ErrorCode::JobFailed: return "JobFailed";
        case ErrorCode::JobTimedOut: return "JobTimedOut";
        case ErrorCode::JobCancelled: return "JobCancelled";
        case ErrorCode::UnknownJob: return "UnknownJob";
    }
    return "Unknown";
}

}  // namespace skyjoin
