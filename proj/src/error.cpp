#include "memsim/error.hpp"

namespace memsim {

namespace {

std::string summarize(const std::vector<FieldIssue>& issues) {
    std::string out = "invalid configuration:";
    for (const auto& issue : issues) {
        out += " ";
        out += issue.field;
        out += ": ";
        out += issue.message;
        out += ";";
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldIssue> issues)
    : std::invalid_argument(summarize(issues)), issues_(std::move(issues)) {}

void IssueList::add(std::string field, std::string message) {
    issues_.push_back({std::move(field), std::move(message)});
}

void IssueList::merge(const std::vector<FieldIssue>& other, const std::string& prefix) {
    for (const auto& issue : other) {
        issues_.push_back({prefix.empty() ? issue.field : prefix + "." + issue.field, issue.message});
    }
}

void IssueList::throw_if_any() const {
    if (!issues_.empty()) throw ValidationError(issues_);
}

}  // namespace memsim
