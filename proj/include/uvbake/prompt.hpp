// prompt.hpp — structured text prompts for dual-view subject generation.
//
// Six short attribute tokens are substituted into a fixed template; the two
// outputs differ only in the view clause. Identical attributes always yield
// byte-identical prompts, so prompt provenance can be replayed exactly.
#pragma once

#include <string>
#include <utility>

#include "uvbake/error.hpp"

namespace uvbake {

struct SubjectAttributes {
    std::string gender;
    std::string body_shape;
    std::string age;
    std::string area;
    std::string profession;
    std::string clothing;
};

inline void validate_attributes(const SubjectAttributes& attrs) {
    const auto check = [](const std::string& value, const char* name) {
        if (value.empty())
            throw ValidationError(std::string("prompt: attribute '") + name + "' must be non-empty");
    };
    check(attrs.gender, "gender");
    check(attrs.body_shape, "body_shape");
    check(attrs.age, "age");
    check(attrs.area, "area");
    check(attrs.profession, "profession");
    check(attrs.clothing, "clothing");
}

struct PromptPair {
    std::string front;
    std::string back;
};

inline PromptPair build_prompts(const SubjectAttributes& attrs) {
    validate_attributes(attrs);
    const auto compose = [&](const std::string& view_clause) {
        return "A full-body studio photograph of a " + attrs.gender + " person with a " +
               attrs.body_shape + " build, " + attrs.age + ", from " + attrs.area +
               ", working as a " + attrs.profession + ", wearing " + attrs.clothing +
               ". Standing upright in a neutral pose with arms slightly away from the body, " +
               view_clause +
               ". Plain seamless background, even diffuse lighting, the entire body visible "
               "from head to toe, photo-realistic, high detail.";
    };
    return {compose("front view, facing the camera"),
            compose("back view, facing away from the camera")};
}

}  // namespace uvbake
