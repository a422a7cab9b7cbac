#include "mitodet/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <vector>

#include "mitodet/common.hpp"
#include "mitodet/fsio.hpp"

namespace mitodet {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return eof() ? '\0' : text[pos]; }
    char get() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw BadInput("toml: line " + std::to_string(line) + ": " + what);
    }
};

void skip_ws(Cursor& c) {
    while (!c.eof() && (c.peek() == ' ' || c.peek() == '\t')) c.get();
}

void skip_to_eol(Cursor& c) {
    while (!c.eof() && c.peek() != '\n') c.get();
    if (!c.eof()) c.get();
}

void expect_line_end(Cursor& c) {
    skip_ws(c);
    if (c.eof() || c.peek() == '\n') {
        if (!c.eof()) c.get();
        return;
    }
    if (c.peek() == '#') {
        skip_to_eol(c);
        return;
    }
    c.fail("unexpected trailing characters");
}

bool bare_key_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

std::string parse_basic_string(Cursor& c) {
    if (c.get() != '"') c.fail("expected '\"'");
    std::string out;
    for (;;) {
        if (c.eof() || c.peek() == '\n') c.fail("unterminated string");
        const char ch = c.get();
        if (ch == '"') return out;
        if (ch == '\\') {
            if (c.eof()) c.fail("unterminated escape");
            const char e = c.get();
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: c.fail(std::string("unsupported escape '\\") + e + "'");
            }
        } else {
            out += ch;
        }
    }
}

std::string parse_key(Cursor& c) {
    if (c.peek() == '"') return parse_basic_string(c);
    std::string key;
    while (!c.eof() && bare_key_char(c.peek())) key += c.get();
    if (key.empty()) c.fail("expected a key");
    return key;
}

std::vector<std::string> parse_key_path(Cursor& c) {
    std::vector<std::string> path;
    for (;;) {
        skip_ws(c);
        path.push_back(parse_key(c));
        skip_ws(c);
        if (c.peek() == '.') {
            c.get();
            continue;
        }
        return path;
    }
}

nlohmann::json parse_value(Cursor& c);

nlohmann::json parse_array(Cursor& c) {
    c.get();  // '['
    nlohmann::json arr = nlohmann::json::array();
    skip_ws(c);
    if (c.peek() == ']') {
        c.get();
        return arr;
    }
    for (;;) {
        skip_ws(c);
        arr.push_back(parse_value(c));
        skip_ws(c);
        const char ch = c.peek();
        if (ch == ',') {
            c.get();
            skip_ws(c);
            if (c.peek() == ']') {  // trailing comma
                c.get();
                return arr;
            }
            continue;
        }
        if (ch == ']') {
            c.get();
            return arr;
        }
        c.fail("expected ',' or ']' in array");
    }
}

nlohmann::json parse_scalar_word(Cursor& c) {
    std::string word;
    while (!c.eof()) {
        const char ch = c.peek();
        if (ch == '\n' || ch == ' ' || ch == '\t' || ch == ',' || ch == ']' || ch == '#') break;
        word += c.get();
    }
    if (word.empty()) c.fail("expected a value");
    if (word == "true") return true;
    if (word == "false") return false;

    const bool looks_float = word.find_first_of(".eE") != std::string::npos &&
                             word.find_first_not_of("+-0123456789.eE") == std::string::npos;
    char* end = nullptr;
    if (!looks_float) {
        const long long v = std::strtoll(word.c_str(), &end, 10);
        if (end && *end == '\0') return v;
    }
    const double d = std::strtod(word.c_str(), &end);
    if (end && *end == '\0') return d;
    c.fail("cannot parse value '" + word + "' (datetimes/inline tables are not supported)");
}

nlohmann::json parse_value(Cursor& c) {
    const char ch = c.peek();
    if (ch == '"') return parse_basic_string(c);
    if (ch == '\'') c.fail("literal strings are not supported, use double quotes");
    if (ch == '[') return parse_array(c);
    if (ch == '{') c.fail("inline tables are not supported");
    return parse_scalar_word(c);
}

// Walks/creates the object path; for a path ending at an array-of-tables the
// last element is the active table.
nlohmann::json* navigate(nlohmann::json* root, const std::vector<std::string>& path, Cursor& c) {
    nlohmann::json* node = root;
    for (const std::string& part : path) {
        if (node->is_array()) {
            if (node->empty()) c.fail("internal: empty table array");
            node = &node->back();
        }
        if (!node->is_object()) c.fail("key '" + part + "' does not name a table");
        node = &(*node)[part];
        if (node->is_null()) *node = nlohmann::json::object();
    }
    if (node->is_array()) node = &node->back();
    return node;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    Cursor c{text};
    nlohmann::json* current = &root;

    while (!c.eof()) {
        skip_ws(c);
        if (c.eof()) break;
        const char ch = c.peek();
        if (ch == '\n') {
            c.get();
            continue;
        }
        if (ch == '#') {
            skip_to_eol(c);
            continue;
        }
        if (ch == '[') {
            c.get();
            const bool table_array = c.peek() == '[';
            if (table_array) c.get();
            const std::vector<std::string> path = parse_key_path(c);
            skip_ws(c);
            if (c.get() != ']') c.fail("expected ']'");
            if (table_array && c.get() != ']') c.fail("expected ']]'");
            expect_line_end(c);

            if (table_array) {
                nlohmann::json* parent =
                    path.size() > 1
                        ? navigate(&root, {path.begin(), path.end() - 1}, c)
                        : &root;
                nlohmann::json& arr = (*parent)[path.back()];
                if (arr.is_null()) arr = nlohmann::json::array();
                if (!arr.is_array()) c.fail("'" + path.back() + "' is not a table array");
                arr.push_back(nlohmann::json::object());
                current = &arr.back();
            } else {
                current = navigate(&root, path, c);
            }
            continue;
        }

        // key = value
        const std::string key = parse_key(c);
        skip_ws(c);
        if (c.get() != '=') c.fail("expected '=' after key '" + key + "'");
        skip_ws(c);
        nlohmann::json value = parse_value(c);
        expect_line_end(c);
        if (current->contains(key)) c.fail("duplicate key '" + key + "'");
        (*current)[key] = std::move(value);
    }
    return root;
}

nlohmann::json parse_toml_file(const std::filesystem::path& path) {
    try {
        return parse_toml(read_text_file(path));
    } catch (const BadInput& e) {
        throw BadInput(path.string() + ": " + e.what());
    }
}

}  // namespace mitodet
