#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perfcharter {

enum class ErrorKind {
    MalformedRow,
    DuplicateWorkloadName,
    NonNumericCell,
    TooFewWorkloads,
    NonPositiveTime,
    NonPositiveSpeedup,
    DuplicateJobName,
    EmptyInput,
    TooFewRows,
    NotSymmetric,
    MaxSweepsExceeded,
    IndexOutOfRange,
    MissingMetric,
    InvalidDistanceMatrix,
    KOutOfRange,
    UnknownWorkload,
    UnknownPrecision,
    ZeroTotalTime,
    UnsupportedWidth,
    SearchSpaceTooLarge,
    JobSetMismatch,
    InvalidArgument,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library is an Error with a kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace perfcharter
