#include "contraforge/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace contraforge {

namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022
constexpr std::string_view kNbsp = "\xC2\xA0";        // U+00A0

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '\'';
}

// Strips one leading bullet or enumerator (plus the following space) from an
// already whitespace-collapsed string. Returns false when nothing matched.
bool strip_one_prefix(std::string& s) {
  if (s.starts_with(kBullet)) {
    s.erase(0, kBullet.size());
    if (!s.empty() && s.front() == ' ') s.erase(0, 1);
    return true;
  }
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') {
    s.erase(0, 2);
    return true;
  }
  if (s == "-" || s == "*") {
    s.clear();
    return true;
  }
  std::size_t digits = 0;
  while (digits < s.size() && digits < 4 &&
         std::isdigit(static_cast<unsigned char>(s[digits]))) {
    ++digits;
  }
  if (digits > 0 && digits <= 3 && digits < s.size() &&
      (s[digits] == '.' || s[digits] == ')')) {
    if (digits + 1 == s.size()) {
      s.clear();
      return true;
    }
    if (s[digits + 1] == ' ') {
      s.erase(0, digits + 2);
      return true;
    }
  }
  return false;
}

const std::array<std::string_view, 24> kAbbreviations = {
    "dr",   "mr",   "mrs",  "ms",   "prof", "inc",  "ltd",  "co",
    "corp", "no",   "nos",  "st",   "jr",   "sr",   "vs",   "dept",
    "approx", "fig", "art", "sec",  "gov",  "est",  "ref",  "mt"};

bool is_abbreviation(std::string_view word) {
  // word excludes the final period.
  if (word.empty()) return false;
  const std::string lower = to_lower_ascii(word);
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) !=
      kAbbreviations.end()) {
    return true;
  }
  // Dotted initialisms: U.S, e.g, i.e, U.K
  if (word.find('.') != std::string_view::npos) {
    bool ok = true;
    for (std::size_t i = 0; i < word.size(); ++i) {
      const bool letter = std::isalpha(static_cast<unsigned char>(word[i]));
      const bool dot = word[i] == '.';
      if ((i % 2 == 0 && !letter) || (i % 2 == 1 && !dot)) ok = false;
    }
    if (ok) return true;
  }
  // Single capital initial, e.g. "J. Smith".
  return word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0]));
}

// Nouns that take a letter designator ("Appendix B."), where the letter
// ends the sentence rather than starting a name.
const std::array<std::string_view, 16> kDesignated = {
    "appendix", "annex", "schedule", "exhibit", "section", "part", "plan", "class",
    "grade",    "tier",  "type",     "group",   "phase",   "option", "form", "level"};

bool designated_letter(std::string_view before, std::string_view letter) {
  if (letter.size() != 1) return false;
  const auto prev = trim(before);
  const auto sp = prev.find_last_of(" \t\n");
  const auto noun = to_lower_ascii(sp == std::string_view::npos ? prev : prev.substr(sp + 1));
  return std::find(kDesignated.begin(), kDesignated.end(), noun) != kDesignated.end();
}

bool starts_sentence(std::string_view rest) {
  if (rest.empty()) return false;
  const auto c = static_cast<unsigned char>(rest[0]);
  if (std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' ||
      c == '(' || c == '[') {
    return true;
  }
  // Curly quotes U+201C / U+2018 and the bullet glyph.
  return rest.starts_with("\xE2\x80\x9C") || rest.starts_with("\xE2\x80\x98") ||
         rest.starts_with(kBullet);
}

}  // namespace

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool nbsp = text.substr(i).starts_with(kNbsp);
    if (is_space(c) || nbsp) {
      pending_space = true;
      if (nbsp) ++i;
      continue;
    }
    if (pending_space && !collapsed.empty()) collapsed.push_back(' ');
    pending_space = false;
    collapsed.push_back(static_cast<char>(c));
  }
  while (strip_one_prefix(collapsed)) {
  }
  return collapsed;
}

std::vector<Chunk> segment_sentences(std::string_view body) {
  std::vector<Chunk> chunks;
  std::size_t start = 0;

  auto emit = [&](std::size_t end) {
    std::size_t b = start;
    std::size_t e = end;
    while (b < e && is_space(static_cast<unsigned char>(body[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(body[e - 1]))) --e;
    if (b < e) chunks.push_back({std::string(body.substr(b, e - b)), b, e});
    start = end;
  };

  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];

    // Paragraph break: newline, optional horizontal space, newline.
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < body.size() && (body[j] == ' ' || body[j] == '\t' || body[j] == '\r')) ++j;
      if (j < body.size() && body[j] == '\n') {
        emit(i);
        i = j + 1;
        continue;
      }
    }

    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i + 1;
      while (j < body.size() && (body[j] == '"' || body[j] == '\'' || body[j] == ')' ||
                                 body[j] == ']')) {
        ++j;
      }
      if (body.substr(j).starts_with("\xE2\x80\x9D") || body.substr(j).starts_with("\xE2\x80\x99")) {
        j += 3;
      }
      std::size_t k = j;
      while (k < body.size() && is_space(static_cast<unsigned char>(body[k]))) ++k;
      const bool has_space = k > j;
      if (has_space && k < body.size() && starts_sentence(body.substr(k))) {
        bool guarded = false;
        if (c == '.') {
          std::size_t w = i;
          while (w > start && !is_space(static_cast<unsigned char>(body[w - 1]))) --w;
          std::string_view word = body.substr(w, i - w);
          while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.remove_prefix(1);
          guarded = is_abbreviation(word) && !designated_letter(body.substr(start, w - start), word);
          // A leading enumerator such as "1." belongs to the following text.
          if (!guarded && !word.empty() && word.size() <= 3 &&
              std::all_of(word.begin(), word.end(),
                          [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            guarded = trim(body.substr(start, w - start)).empty();
          }
        }
        if (!guarded) {
          emit(j);
          i = j;
          continue;
        }
      }
    }
    ++i;
  }
  emit(body.size());
  return chunks;
}

std::vector<std::string> split_paragraphs(std::string_view body) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  auto flush = [&] {
    std::string t = trim(current);
    if (!t.empty()) out.push_back(std::move(t));
    current.clear();
  };
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = body.substr(pos, nl - pos);
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    pos = nl + 1;
  }
  flush();
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::size_t word_count(std::string_view text) { return split_words(text).size(); }

bool normalized_contains(std::string_view haystack, std::string_view needle) {
  const std::string n = normalize_text(needle);
  if (n.empty()) return false;
  return normalize_text(haystack).find(n) != std::string::npos;
}

bool contains_word_ci(std::string_view text, std::string_view word) {
  if (word.empty()) return false;
  const std::string hay = to_lower_ascii(text);
  const std::string w = to_lower_ascii(word);
  std::size_t pos = 0;
  while ((pos = hay.find(w, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(hay[pos - 1]));
    const std::size_t after = pos + w.size();
    const bool right_ok =
        after >= hay.size() || !is_word_char(static_cast<unsigned char>(hay[after]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() > b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(a.size() + 1, 0);
  std::vector<std::size_t> cur(a.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t j = 1; j <= b.size(); ++j) {
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[i] = a[i - 1] == b[j - 1] ? prev[i - 1] + 1 : 0;
      best = std::max(best, cur[i]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

std::string render_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string_view name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(vars.begin(), vars.end(),
                               [&](const auto& kv) { return kv.first == name; });
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

}  // namespace contraforge
