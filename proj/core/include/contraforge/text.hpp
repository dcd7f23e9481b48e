#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace contraforge {

/// Canonical chunk form used for keying and containment checks.
///
/// Collapses whitespace runs to one space, trims both ends and strips leading
/// bullet glyphs ("-", "*", "•") and enumeration prefixes ("1.", "2)").
/// Idempotent and never longer than its input.
std::string normalize_text(std::string_view text);

/// A sentence-level span of a larger text.
struct Chunk {
  std::string text;
  std::size_t begin = 0;  // byte offset of text[0] in the source
  std::size_t end = 0;    // one past the last byte
};

/// Splits prose into sentences.
///
/// A boundary is sentence-final punctuation (. ! ?), optionally followed by
/// closing quotes or brackets, then whitespace, then an uppercase letter, a
/// quote or a digit. Common abbreviations ("Dr.", "Inc.", "U.S.", "No.", ...)
/// and leading enumerators ("1.") do not end a sentence. Blank lines always
/// end one. Offsets index into `body`.
std::vector<Chunk> segment_sentences(std::string_view body);

/// Paragraphs separated by one or more blank lines, trimmed, non-empty.
std::vector<std::string> split_paragraphs(std::string_view body);

std::vector<std::string> split_words(std::string_view text);
std::size_t word_count(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string trim(std::string_view text);

/// normalize(needle) is a substring of normalize(haystack); false for an empty
/// needle.
bool normalized_contains(std::string_view haystack, std::string_view needle);

/// Case-insensitive whole-word search. Word characters are ASCII
/// alphanumerics and the apostrophe.
bool contains_word_ci(std::string_view text, std::string_view word);

/// Length in bytes of the longest common substring.
std::size_t longest_common_substring(std::string_view a, std::string_view b);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Replaces every `{name}` whose name is a key of `vars`; other braces are
/// left untouched so JSON examples inside templates survive.
std::string render_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace contraforge
