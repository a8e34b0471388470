#include "perfcharter/error.hpp"

namespace perfcharter {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateWorkloadName: return "DuplicateWorkloadName";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::TooFewWorkloads: return "TooFewWorkloads";
    case ErrorKind::NonPositiveTime: return "NonPositiveTime";
    case ErrorKind::NonPositiveSpeedup: return "NonPositiveSpeedup";
    case ErrorKind::DuplicateJobName: return "DuplicateJobName";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::MaxSweepsExceeded: return "MaxSweepsExceeded";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::MissingMetric: return "MissingMetric";
    case ErrorKind::InvalidDistanceMatrix: return "InvalidDistanceMatrix";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::UnknownWorkload: return "UnknownWorkload";
    case ErrorKind::UnknownPrecision: return "UnknownPrecision";
    case ErrorKind::ZeroTotalTime: return "ZeroTotalTime";
    case ErrorKind::UnsupportedWidth: return "UnsupportedWidth";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::JobSetMismatch: return "JobSetMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace perfcharter
