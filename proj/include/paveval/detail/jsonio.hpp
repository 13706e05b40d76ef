#pragma once

#include <string_view>

#include <json.hpp>

#include "paveval/errors.hpp"

namespace paveval::detail {

inline nlohmann::json parse_json_document(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace paveval::detail
