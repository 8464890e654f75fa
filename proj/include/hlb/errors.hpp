#pragma once
#include <stdexcept>
#include <string>

namespace hlb {

// Every failure carries a short kebab-case code so callers (and the CLI) can
// branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, const char* code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace hlb
