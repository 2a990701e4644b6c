#include "pcg/error.hpp"

namespace pcg {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedWav: return "MalformedWav";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::BadLabel: return "BadLabel";
    case Errc::DuplicateRecordId: return "DuplicateRecordId";
    case Errc::NonMonotonicIndex: return "NonMonotonicIndex";
    case Errc::BrokenStateCycle: return "BrokenStateCycle";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::BandOutOfRange: return "BandOutOfRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::TooShort: return "TooShort";
    case Errc::NoFeasiblePath: return "NoFeasiblePath";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NoCompleteBeat: return "NoCompleteBeat";
    case Errc::InsufficientBeats: return "InsufficientBeats";
    case Errc::DegenerateEnergy: return "DegenerateEnergy";
    case Errc::NoPeakInRange: return "NoPeakInRange";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::TooFewBeats: return "TooFewBeats";
    case Errc::DegenerateSignal: return "DegenerateSignal";
    case Errc::TooFewVectors: return "TooFewVectors";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::NoCrossing: return "NoCrossing";
    case Errc::NoPositives: return "NoPositives";
    case Errc::NoNegatives: return "NoNegatives";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pcg
