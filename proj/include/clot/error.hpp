// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace clot {

// Every defined failure mode in the library maps to one code.
enum class Errc {
    // backend
    transport_exhausted,
    auth_failed,
    malformed_response,
    script_miss,
    // parsers
    no_tag_found,
    parse_failed,
    no_x_found,
    multiple_x_found,
    masked_value_unresolvable,
    no_items_found,
    // judge
    kind_mismatch,
    // engine
    missing_logprobs,
    // misc
    overflow,
    config_invalid,
    io_error,
    format_error,
    length_mismatch,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace clot
