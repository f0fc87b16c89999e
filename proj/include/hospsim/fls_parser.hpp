#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hospsim/fuzzy.hpp"

namespace hospsim::fuzzy {

/// Parses the line-oriented FLS definition format:
///
///   # comment
///   var input <name> <lo> <hi>
///   var output <name> <lo> <hi>
///   term <var> <name> tri a b c
///   term <var> <name> trap a b c d
///   rule IF <var> IS <term> [AND <var> IS <term>]... THEN <var> IS <term>
///
/// Exactly one output variable per definition. Throws an FlsError subclass
/// carrying the line and column of the offending token.
FuzzySystem load_fls_definition(std::string_view text, int resolution = FuzzySystem::kDefaultResolution);

/// Reads and parses a file. I/O failures throw std::ios_base::failure.
FuzzySystem load_fls_file(const std::filesystem::path& path);

/// Text of the file, or std::ios_base::failure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hospsim::fuzzy
