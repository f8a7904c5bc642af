#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratefix {

enum class Errc {
    InvalidArgument,
    ParseError,
    EmptyWindow,
    DuplicateSubmission,
    TooFewBanks,
    NonFiniteQuote,
    EmptyAfterTrim,
    InvalidConfig,
    LengthMismatch,
    NonFiniteValue,
    DegeneratePanel,
    InvalidK,
    PanelTooSmall,
    InvalidStrategyTarget,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for every library failure; the code tells callers
// which contract was violated.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace ratefix
