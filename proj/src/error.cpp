#include "smlab/error.hpp"

namespace smlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DivisionByDegenerate: return "DivisionByDegenerate";
        case ErrorKind::NegativeRadicand: return "NegativeRadicand";
        case ErrorKind::BasePointMismatch: return "BasePointMismatch";
        case ErrorKind::OrderMismatch: return "OrderMismatch";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::RejectedConstruct: return "RejectedConstruct";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::DegeneratePoint: return "DegeneratePoint";
        case ErrorKind::RankMismatch: return "RankMismatch";
        case ErrorKind::ChartRangeError: return "ChartRangeError";
        case ErrorKind::DegenerateStart: return "DegenerateStart";
        case ErrorKind::RankZeroEncountered: return "RankZeroEncountered";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotA2: return "NotA2";
        case ErrorKind::ExtrapolationDiverged: return "ExtrapolationDiverged";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::NotCrossCap: return "NotCrossCap";
        case ErrorKind::SolveFailed: return "SolveFailed";
        case ErrorKind::DegenerateGHessian: return "DegenerateGHessian";
        case ErrorKind::SingularSetUnresolved: return "SingularSetUnresolved";
        case ErrorKind::NonConvergentNearA3: return "NonConvergentNearA3";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace smlab
