#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

/// One violated invariant, addressed by a dotted field path such as
/// `vehicle.wheel_radius` or `attack.spl_at_source`.
struct FieldIssue {
    std::string field;
    std::string message;
};

/// Thrown when a configuration is well-formed but breaks a domain invariant.
/// Carries every violation found, not only the first one.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<FieldIssue> issues);

    const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<FieldIssue> issues_;
};

/// Thrown when a document cannot be decoded at all (bad JSON, wrong types,
/// unknown keys, truncated files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an operation is not legal in the session's current state.
class LifecycleError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Thrown when a benign reference does not match the log it is compared to.
class ReferenceMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Accumulates field issues while validating nested structures.
class IssueList {
public:
    void add(std::string field, std::string message);
    void require(bool ok, const std::string& field, const std::string& message) {
        if (!ok) add(field, message);
    }
    void merge(const std::vector<FieldIssue>& other, const std::string& prefix);
    bool empty() const noexcept { return issues_.empty(); }
    const std::vector<FieldIssue>& issues() const noexcept { return issues_; }
    void throw_if_any() const;

private:
    std::vector<FieldIssue> issues_;
};

}  // namespace memsim
