#pragma once

// Text form of formulas and terms.
//
//   formula := true | false | (= h h) | (< h h) | (num= t t) | (num< t t)
//            | (leq (h..) (h..)) | (lt (h..) (h..)) | (half-leq (h..) (h..))
//            | (bit (h..) (h..)) | (not f) | (and f..) | (or f..)
//            | (implies f f) | (iff f f) | (forall x f) | (forall (x..) f)
//            | (exists ...) | (gfr g ((x..) (y1..) .. (yi..) (rest..)) t f)
//            | (bgfr ...) | (R h..)
//   term    := 3 | -2/5 | "(1,0,-1)" | (+ t..) | (* t..) | (sign t) | (chi f)
//            | (sum (x..) [(rel f)] t) | prod | max | bsum | bprod | bmax
//            | (F h..)
//   h       := variable | element number | (s h..)
//
// Inside a gfr block the recursion symbol applied to index terms is a
// recursion call. Comments run from ';' to the end of the line.

#include <string>
#include <string_view>

#include "ringcirc/logic.hpp"

namespace ringcirc {

/// Throws Error("syntax") with line and column on malformed input.
FormulaPtr parse_formula(std::string_view text);
NumberTermPtr parse_term(std::string_view text);

std::string to_sexpr(const FormulaPtr& f);
std::string to_sexpr(const NumberTermPtr& t);
std::string to_sexpr(const IndexTermPtr& h);

}  // namespace ringcirc
