#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace ncache {

std::string read_file(const std::string& path);

// Writes through a temporary sibling file and renames it over `path`, so a
// reader never observes a partially written file.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

}  // namespace ncache
