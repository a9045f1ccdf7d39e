#pragma once

#include <map>
#include <json.hpp>
#include <string>
#include <string_view>

namespace gle {

/// SHA-1 hex digest, used to stamp emitted artifacts.
std::string sha1_hex(std::string_view data);

/// CSV with `# key=value` header comments, a `# content_sha1=` stamp of the
/// data payload, then the column header and rows.
void write_csv(const std::string& path,
               const std::map<std::string, std::string>& config,
               const std::string& header, const std::string& rows);

/// JSON document with the resolved config and a content hash of the result
/// object embedded.
void write_json(const std::string& path,
                const std::map<std::string, std::string>& config,
                const nlohmann::json& result);

}  // namespace gle
