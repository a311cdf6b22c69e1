#pragma once

#include <stdexcept>
#include <string>

namespace zml {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// used by the CLI to map failures onto exit codes and JSON summaries.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ZML_DEFINE_ERROR(Name, tag)                                           \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(tag, what) {}          \
    };

ZML_DEFINE_ERROR(DomainError, "domain")
ZML_DEFINE_ERROR(PoleError, "pole")
ZML_DEFINE_ERROR(PrecisionError, "precision")
ZML_DEFINE_ERROR(ProximityError, "proximity")
ZML_DEFINE_ERROR(CoverageError, "coverage")
ZML_DEFINE_ERROR(ParseError, "parse")
ZML_DEFINE_ERROR(MonotonicityError, "monotonicity")
ZML_DEFINE_ERROR(RangeError, "range")
ZML_DEFINE_ERROR(IndexError, "index")
ZML_DEFINE_ERROR(PreconditionError, "precondition")
ZML_DEFINE_ERROR(CapacityError, "capacity")
ZML_DEFINE_ERROR(CombinatorialError, "combinatorial")
ZML_DEFINE_ERROR(HypothesisError, "hypothesis")
ZML_DEFINE_ERROR(OverflowGuardError, "overflow")
ZML_DEFINE_ERROR(FormatError, "format")

#undef ZML_DEFINE_ERROR

/// Raised by the zero scanner when the found count disagrees with the
/// argument-principle count. Carries the suspect subinterval.
class AuditMismatchError : public Error {
public:
    AuditMismatchError(const std::string& what, double lo, double hi, long expected, long found)
        : Error("audit-mismatch", what), lo_(lo), hi_(hi), expected_(expected), found_(found) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    long expected() const noexcept { return expected_; }
    long found() const noexcept { return found_; }

private:
    double lo_, hi_;
    long expected_, found_;
};

}  // namespace zml
