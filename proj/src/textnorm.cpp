#include "skillscope/textnorm.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <sstream>

#include "json.hpp"

namespace skillscope::textnorm {

namespace {

bool is_lower_word(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < 'a' || c > 'z') return false;
  return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one code point at s[i]; invalid sequences yield U+FFFD and advance one byte.
std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xFFFD;
  }
  std::uint32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

struct Translit {
  std::uint32_t first, last;
  const char* ascii;
};

// Latin-1 Supplement and Latin Extended-A letters; everything else in those
// blocks (and beyond) is treated as a special character.
constexpr std::array<Translit, 52> kTranslit{{
    {0x00C0, 0x00C5, "a"}, {0x00C6, 0x00C6, "ae"}, {0x00C7, 0x00C7, "c"},  {0x00C8, 0x00CB, "e"},
    {0x00CC, 0x00CF, "i"}, {0x00D0, 0x00D0, "d"},  {0x00D1, 0x00D1, "n"},  {0x00D2, 0x00D6, "o"},
    {0x00D8, 0x00D8, "o"}, {0x00D9, 0x00DC, "u"},  {0x00DD, 0x00DD, "y"},  {0x00DE, 0x00DE, "th"},
    {0x00DF, 0x00DF, "ss"}, {0x00E0, 0x00E5, "a"}, {0x00E6, 0x00E6, "ae"}, {0x00E7, 0x00E7, "c"},
    {0x00E8, 0x00EB, "e"}, {0x00EC, 0x00EF, "i"},  {0x00F0, 0x00F0, "d"},  {0x00F1, 0x00F1, "n"},
    {0x00F2, 0x00F6, "o"}, {0x00F8, 0x00F8, "o"},  {0x00F9, 0x00FC, "u"},  {0x00FD, 0x00FD, "y"},
    {0x00FE, 0x00FE, "th"}, {0x00FF, 0x00FF, "y"}, {0x0100, 0x0105, "a"},  {0x0106, 0x010D, "c"},
    {0x010E, 0x0111, "d"}, {0x0112, 0x011B, "e"},  {0x011C, 0x0123, "g"},  {0x0124, 0x0127, "h"},
    {0x0128, 0x0131, "i"}, {0x0132, 0x0133, "ij"}, {0x0134, 0x0135, "j"},  {0x0136, 0x0138, "k"},
    {0x0139, 0x0142, "l"}, {0x0143, 0x014B, "n"},  {0x014C, 0x0151, "o"},  {0x0152, 0x0153, "oe"},
    {0x0154, 0x0159, "r"}, {0x015A, 0x0161, "s"},  {0x0162, 0x0167, "t"},  {0x0168, 0x0173, "u"},
    {0x0174, 0x0175, "w"}, {0x0176, 0x0178, "y"},  {0x0179, 0x017E, "z"},  {0x017F, 0x017F, "s"},
    {0x00A0, 0x00A0, " "}, {0x2010, 0x2015, " "},  {0x2018, 0x201F, " "},  {0x2022, 0x2026, " "},
}};

const char* lookup_translit(std::uint32_t cp) {
  for (const auto& t : kTranslit)
    if (cp >= t.first && cp <= t.last) return t.ascii;
  return nullptr;
}

const std::unordered_map<std::string, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string, std::uint32_t> table = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
      {"nbsp", 0xA0},   {"copy", 0xA9},    {"reg", 0xAE},     {"pound", 0xA3},   {"euro", 0x20AC},
      {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"bull", 0x2022},  {"lsquo", 0x2018},
      {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"agrave", 0xE0},  {"aacute", 0xE1},
      {"acirc", 0xE2},  {"atilde", 0xE3},  {"auml", 0xE4},    {"aring", 0xE5},   {"aelig", 0xE6},
      {"ccedil", 0xE7}, {"egrave", 0xE8},  {"eacute", 0xE9},  {"ecirc", 0xEA},   {"euml", 0xEB},
      {"igrave", 0xEC}, {"iacute", 0xED},  {"icirc", 0xEE},   {"iuml", 0xEF},    {"ntilde", 0xF1},
      {"ograve", 0xF2}, {"oacute", 0xF3},  {"ocirc", 0xF4},   {"otilde", 0xF5},  {"ouml", 0xF6},
      {"oslash", 0xF8}, {"ugrave", 0xF9},  {"uacute", 0xFA},  {"ucirc", 0xFB},   {"uuml", 0xFC},
      {"yacute", 0xFD}, {"yuml", 0xFF},    {"szlig", 0xDF},
  };
  return table;
}

}  // namespace

NormConfig::NormConfig(std::unordered_set<std::string> stopwords, std::unordered_map<std::string, std::string> lemmas,
                       bool strip_html)
    : strip_html_(strip_html) {
  for (const auto& w : stopwords) {
    std::string l = w;
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!l.empty()) stopwords_.insert(l);
  }
  for (auto& [k, v] : lemmas) {
    std::string key = k;
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key == v) continue;
    lemmas_[key] = v;
  }
  for (const auto& [k, v] : lemmas_) {
    if (!is_lower_word(v) || v.size() < 2)
      throw Error("invalid_lemma_table", "lemma '" + v + "' for '" + k + "' is not a lowercase word of length >= 2");
    if (stopwords_.count(v)) throw Error("invalid_lemma_table", "lemma '" + v + "' for '" + k + "' is a stopword");
    if (lemmas_.count(v))
      throw Error("invalid_lemma_table", "lemma '" + v + "' for '" + k + "' is itself mapped to another lemma");
  }
}

const NormConfig& NormConfig::bundled() {
  static const NormConfig cfg =
      from_files(resource_path("data/stopwords_en.txt"), resource_path("data/lemmas_en.tsv"));
  return cfg;
}

NormConfig NormConfig::from_files(const std::filesystem::path& stopword_file, const std::filesystem::path& lemma_file,
                                  bool strip_html) {
  return NormConfig(load_stopwords(stopword_file), load_lemma_table(lemma_file), strip_html);
}

const std::string& NormConfig::lemma(const std::string& token) const {
  auto it = lemmas_.find(token);
  return it == lemmas_.end() ? token : it->second;
}

NormConfig NormConfig::without_stopword_removal() const {
  NormConfig c = *this;
  c.remove_stopwords_ = false;
  return c;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::unordered_set<std::string> out;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.insert(line);
  }
  return out;
}

std::unordered_map<std::string, std::string> load_lemma_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::unordered_map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error("invalid_lemma_table", path.string() + ":" + std::to_string(line_no) + ": expected surface<TAB>lemma");
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    std::uint32_t cp = 0;
    bool ok = false;
    if (name.size() >= 2 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string_view digits = name.substr(hex ? 2 : 1);
      ok = !digits.empty();
      for (char c : digits) {
        int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                : hex && std::isxdigit(static_cast<unsigned char>(c))
                    ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                    : -1;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      ok = ok && cp <= 0x10FFFF;
    } else {
      auto it = named_entities().find(std::string(name));
      if (it != named_entities().end()) {
        cp = it->second;
        ok = true;
      }
    }
    if (!ok) {
      out.push_back('&');
      continue;
    }
    // keep the output lowercase, as the pipeline has already lowercased
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    if (cp != 0) append_utf8(out, cp);
    i = semi;
  }
  return out;
}

std::string strip_tags(std::string_view text, NormStats* stats) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '<') {
      out.push_back(text[i]);
      continue;
    }
    std::size_t close = text.find('>', i + 1);
    if (close == std::string_view::npos) {
      if (stats) ++stats->unclosed_tags;
      break;
    }
    out.push_back(' ');
    i = close;
  }
  return out;
}

std::string transliterate(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    if (static_cast<unsigned char>(utf8[i]) < 0x80) {
      out.push_back(utf8[i++]);
      continue;
    }
    std::uint32_t cp = next_codepoint(utf8, i);
    const char* a = lookup_translit(cp);
    out += a ? a : " ";
  }
  return out;
}

Tokens normalize(std::string_view text, const NormConfig& cfg, NormStats* stats) {
  std::string s(text);
  for (auto& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  s = decode_entities(s);
  if (cfg.strip_html()) s = strip_tags(s, stats);
  s = transliterate(s);

  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!(cfg.remove_stopwords() && cfg.is_stopword(current))) {
      const std::string& lemma = cfg.lemma(current);
      if (lemma.size() >= 2) tokens.push_back(lemma);
    }
    current.clear();
  };
  for (char c : s) {
    if (c >= '0' && c <= '9') continue;  // digits vanish in place
    if (c >= 'a' && c <= 'z') current.push_back(c);
    else if (c >= 'A' && c <= 'Z') current.push_back(static_cast<char>(c - 'A' + 'a'));
    else flush();
  }
  flush();
  return tokens;
}

std::vector<NormalizedDoc> normalize_corpus(const corpus::Corpus& c, const NormConfig& cfg) {
  std::vector<NormalizedDoc> docs(c.ads.size());
  parallel_for(c.ads.size(), [&](std::size_t i) {
    docs[i].ad_id = c.ads[i].id;
    docs[i].tokens = normalize(c.ads[i].description_raw, cfg);
  });
  return docs;
}

std::string join(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string to_jsonl(const std::vector<NormalizedDoc>& docs) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json j{{"id", d.ad_id}, {"tokens", d.tokens}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<NormalizedDoc> docs_from_jsonl(std::string_view text) {
  std::vector<NormalizedDoc> docs;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("tokens"))
      throw Error("malformed_docs", "malformed normalized-doc line " + std::to_string(line_no));
    docs.push_back({j["id"].get<std::string>(), j["tokens"].get<Tokens>()});
  }
  return docs;
}

}  // namespace skillscope::textnorm
