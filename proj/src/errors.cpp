#include "uavshare/errors.hpp"

namespace uavshare {

namespace {
constexpr std::string_view kErrorNames[] = {
    "Malformed",       "AuthFailure",       "DecryptFailure",    "StaleTimestamp", "DuplicateId",
    "BlacklistedId",   "UnknownId",         "UnknownFile",       "EmptyRecipientSet",
    "NoBoxForId",      "NoEligibleMembers", "MissingSegment",    "HintMismatch",
    "SpSignatureInvalid", "UnknownUE",      "NoSession",         "StepLimitExceeded",
    "ParseError",
};
}  // namespace

std::string_view error_name(Error e) { return kErrorNames[static_cast<int>(e)]; }

ProtocolError::ProtocolError(Error code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + (detail.empty() ? "" : ": " + detail)), code_(code) {}

}  // namespace uavshare
