#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace datapop {

// Plain "key = value" config text. '#' starts a comment; blank lines are
// ignored; later duplicates override earlier ones.
std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    const std::string& source);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

}  // namespace datapop
