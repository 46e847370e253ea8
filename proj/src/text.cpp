#include "multiref/text.hpp"

#include "multiref/errors.hpp"

namespace multiref::text {

char32_t decode_codepoint(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i < len; ++i) {
    unsigned char bi = byte(pos + i);
    if ((bi & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (bi & 0x3F);
  }
  // Reject overlong encodings and surrogates the same permissive way.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
      cp > 0x10FFFF) {
    ++pos;
    return 0xFFFD;
  }
  pos += len;
  return cp;
}

bool is_space(char32_t c) {
  switch (c) {
    case 0x09:
    case 0x0A:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x20:
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1:    // inverted exclamation
    case 0xAB:    // left guillemet
    case 0xB7:    // middle dot
    case 0xBB:    // right guillemet
    case 0xBF:    // inverted question
    case 0x2018:  // curly quotes
    case 0x2019:
    case 0x201A:
    case 0x201C:
    case 0x201D:
    case 0x201E:
    case 0x2026:  // ellipsis
    case 0x2032:
    case 0x2033:
    case 0x2039:
    case 0x203A:
    case 0x3001:  // CJK comma, full stop
    case 0x3002:
    case 0xFF01:  // fullwidth ! , . : ; ?
    case 0xFF0C:
    case 0xFF0E:
    case 0xFF1A:
    case 0xFF1B:
    case 0xFF1F:
      return true;
    default:
      return (c >= 0x2010 && c <= 0x2015) ||  // hyphens and dashes
             (c >= 0x300A && c <= 0x300F);    // CJK brackets
  }
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  // Latin-1 supplement capitals, skipping the multiplication sign.
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  // Latin Extended-A: alternating case pairs.
  if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  // Basic Cyrillic.
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

namespace {

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    append_utf8(out, to_lower(decode_codepoint(s, pos)));
  }
  return out;
}

std::vector<std::string_view> whitespace_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  std::size_t run_start = 0;
  bool in_run = false;
  while (pos < s.size()) {
    std::size_t cp_start = pos;
    char32_t cp = decode_codepoint(s, pos);
    if (is_space(cp)) {
      if (in_run) {
        out.push_back(s.substr(run_start, cp_start - run_start));
        in_run = false;
      }
    } else if (!in_run) {
      run_start = cp_start;
      in_run = true;
    }
  }
  if (in_run) out.push_back(s.substr(run_start));
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t count = 0;
  std::size_t pos = 0;
  bool in_run = false;
  while (pos < s.size()) {
    char32_t cp = decode_codepoint(s, pos);
    if (is_space(cp)) {
      in_run = false;
    } else if (!in_run) {
      ++count;
      in_run = true;
    }
  }
  return count;
}

std::vector<std::string> scorer_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string lowered = lowercase(s);
  for (std::string_view tok : whitespace_tokens(lowered)) {
    // Decode once to find the punctuation prefix/suffix boundaries.
    std::vector<std::pair<std::size_t, std::size_t>> cps;  // (offset, len)
    std::size_t pos = 0;
    std::vector<char32_t> vals;
    while (pos < tok.size()) {
      std::size_t start = pos;
      vals.push_back(decode_codepoint(tok, pos));
      cps.emplace_back(start, pos - start);
    }
    std::size_t lead = 0;
    while (lead < vals.size() && is_punct(vals[lead])) ++lead;
    std::size_t trail = vals.size();
    while (trail > lead && is_punct(vals[trail - 1])) --trail;
    for (std::size_t i = 0; i < lead; ++i) {
      out.emplace_back(tok.substr(cps[i].first, cps[i].second));
    }
    if (trail > lead) {
      std::size_t begin = cps[lead].first;
      std::size_t end = cps[trail - 1].first + cps[trail - 1].second;
      out.emplace_back(tok.substr(begin, end - begin));
    }
    for (std::size_t i = trail; i < vals.size(); ++i) {
      out.emplace_back(tok.substr(cps[i].first, cps[i].second));
    }
  }
  return out;
}

WordTokenizerRule parse_tokenizer_rule(std::string_view name) {
  if (name == "punct") return WordTokenizerRule::kPunct;
  if (name == "whitespace") return WordTokenizerRule::kWhitespace;
  throw UsageError("unknown tokenizer rule: " + std::string(name) +
                   " (expected punct or whitespace)");
}

std::string_view tokenizer_rule_name(WordTokenizerRule rule) {
  return rule == WordTokenizerRule::kPunct ? "punct" : "whitespace";
}

std::vector<std::string> word_tokens(std::string_view s, WordTokenizerRule rule,
                                     bool lowercase_text) {
  std::string owned;
  if (lowercase_text) {
    owned = lowercase(s);
    s = owned;
  }
  std::vector<std::string> out;
  if (rule == WordTokenizerRule::kWhitespace) {
    for (std::string_view tok : whitespace_tokens(s)) out.emplace_back(tok);
    return out;
  }
  std::string current;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t start = pos;
    char32_t cp = decode_codepoint(s, pos);
    if (is_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else if (is_punct(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      out.emplace_back(s.substr(start, pos - start));
    } else {
      current.append(s.substr(start, pos - start));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::u32string codepoints_no_space(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    char32_t cp = decode_codepoint(s, pos);
    if (!is_space(cp)) out.push_back(cp);
  }
  return out;
}

}  // namespace multiref::text
