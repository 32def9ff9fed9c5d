#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uavshare {

enum class Error {
    Malformed,
    AuthFailure,
    DecryptFailure,
    StaleTimestamp,
    DuplicateId,
    BlacklistedId,
    UnknownId,
    UnknownFile,
    EmptyRecipientSet,
    NoBoxForId,
    NoEligibleMembers,
    MissingSegment,
    HintMismatch,
    SpSignatureInvalid,
    UnknownUE,
    NoSession,
    StepLimitExceeded,
    ParseError,
};

std::string_view error_name(Error e);

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(Error code, const std::string& detail = {});

    Error code() const noexcept { return code_; }

private:
    Error code_;
};

}  // namespace uavshare
