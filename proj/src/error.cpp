#include "hubforge/error.hpp"

namespace hubforge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::MissingRng: return "MissingRng";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::DivergentMoment: return "DivergentMoment";
    case ErrorCode::TableOutOfRange: return "TableOutOfRange";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::EmptyStructure: return "EmptyStructure";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::ExplosionSuspected: return "ExplosionSuspected";
    case ErrorCode::DivergentExpectation: return "DivergentExpectation";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace hubforge
