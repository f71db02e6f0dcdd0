#include "role/error.hpp"

namespace role {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::validation_error: return "ValidationError";
        case ErrorCode::config_parse_error: return "ConfigParseError";
        case ErrorCode::unknown_strategy: return "UnknownStrategy";
        case ErrorCode::unknown_entity: return "UnknownEntity";
        case ErrorCode::unknown_widget: return "UnknownWidget";
        case ErrorCode::unknown_technique: return "UnknownTechnique";
        case ErrorCode::unknown_catalog_reference: return "UnknownCatalogReference";
        case ErrorCode::unknown_learner: return "UnknownLearner";
        case ErrorCode::unknown_space: return "UnknownSpace";
        case ErrorCode::unknown_instance: return "UnknownInstance";
        case ErrorCode::non_monotonic_timestamp: return "NonMonotonicTimestamp";
        case ErrorCode::name_taken: return "NameTaken";
        case ErrorCode::invalid_name: return "InvalidName";
        case ErrorCode::not_a_member: return "NotAMember";
        case ErrorCode::last_member: return "LastMember";
        case ErrorCode::connection_closed: return "ConnectionClosed";
        case ErrorCode::empty_message: return "EmptyMessage";
        case ErrorCode::stale_recommendation: return "StaleRecommendation";
        case ErrorCode::corpus_unavailable: return "CorpusUnavailable";
        case ErrorCode::unauthorized: return "Unauthorized";
    }
    return "Error";
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string out = "catalog validation failed";
    for (const auto& p : problems) {
        out += "\n  - ";
        out += p;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(ErrorCode::validation_error, join_problems(problems)),
      problems_(std::move(problems)) {}

}  // namespace role
