#pragma once

#include <string>

#include "signflow/random.hpp"
#include "signflow/skeleton.hpp"

namespace signflow::test {

inline SkeletonFrame random_frame(Rng& rng, double t = 0.0, double spread = 1.0) {
    SkeletonFrame f(t);
    for (JointId id : kAllJoints)
        f.set(id, {rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-spread, spread) + 2.0, 1.0});
    return f;
}

inline SkeletonFrame translated(const SkeletonFrame& f, double dx, double dy, double dz) {
    SkeletonFrame out(f.timestamp());
    for (JointId id : kAllJoints)
        if (const auto& j = f.get(id))
            out.set(id, {j->x + dx, j->y + dy, j->z + dz, j->confidence});
    return out;
}

inline SkeletonSequence random_sequence(Rng& rng, std::size_t n, double fps = 30.0) {
    SkeletonSequence seq;
    for (std::size_t i = 0; i < n; ++i)
        seq.frames.push_back(random_frame(rng, static_cast<double>(i) / fps));
    return seq;
}

inline std::string tmp_dir(const std::string& name) { return std::string(SIGNFLOW_TEST_TMP) + "/" + name; }

} // namespace signflow::test
