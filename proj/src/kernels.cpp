#include "mrta/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mrta::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops* avx2_ops_if_supported();
#endif
#if defined(__aarch64__)
const Ops* neon_ops();
#endif

std::vector<const Ops*> available_ops() {
    std::vector<const Ops*> arr{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
    if (const Ops* o = avx2_ops_if_supported()) arr.push_back(o);
#endif
#if defined(__aarch64__)
    arr.push_back(neon_ops());
#endif
    return arr;
}

namespace {

const Ops& resolve() {
    const auto variants = available_ops();
    if (const char* req = std::getenv("MRTA_KERNELS")) {
        for (const Ops* o : variants)
            if (std::strcmp(o->name, req) == 0) return *o;
        // Unknown or unsupported requests fall through to the default pick.
    }
    return *variants.back();
}

}  // namespace

const Ops& active_ops() {
    static const Ops& picked = resolve();
    return picked;
}

}  // namespace mrta::kernels
