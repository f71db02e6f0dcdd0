#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace role {

enum class ErrorCode {
    parse_error,
    validation_error,
    config_parse_error,
    unknown_strategy,
    unknown_entity,
    unknown_widget,
    unknown_technique,
    unknown_catalog_reference,
    unknown_learner,
    unknown_space,
    unknown_instance,
    non_monotonic_timestamp,
    name_taken,
    invalid_name,
    not_a_member,
    last_member,
    connection_closed,
    empty_message,
    stale_recommendation,
    corpus_unavailable,
    unauthorized,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by catalog validation; carries every problem found, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

}  // namespace role
