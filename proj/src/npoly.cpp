#include "palab/npoly.hpp"

namespace palab {

std::string NPoly::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        Rational a = c < 0 ? Rational(-c) : c;
        if (first) {
            if (c < 0) out += "-";
            first = false;
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (e == 0) {
            out += rat_str(a);
        } else {
            if (a != 1) out += rat_str(a) + "*";
            out += "N";
            if (e != 1) out += "^" + std::to_string(e);
        }
    }
    return out;
}

}  // namespace palab
