#pragma once

// Small scene fixtures shared by tests.

#include <string>

#include "hsi/scene/mesh.hpp"

namespace hsi::fixture {

// Large slab whose top face is z = 0.
inline TriMesh ground(double half = 5.0) { return make_box({-half, -half, -0.2}, {half, half, 0.0}); }

// Room around the origin closed on every side except +x. Floor top at z = 0.
inline TriMesh room_open_px() {
    const double t = 0.05;
    return merge_meshes({
        make_box({-0.6, -0.6, -t}, {0.6, 0.6, 0.0}),      // floor
        make_box({-0.6, -0.6, 1.0}, {0.6, 0.6, 1.0 + t}),  // ceiling
        make_box({-0.6 - t, -0.6, 0.0}, {-0.6, 0.6, 1.0}), // -x wall
        make_box({-0.6, -0.6 - t, 0.0}, {0.6, -0.6, 1.0}), // -y wall
        make_box({-0.6, 0.6, 0.0}, {0.6, 0.6 + t, 1.0}),   // +y wall
    });
}

// Same room with the +x side closed too.
inline TriMesh room_sealed() {
    TriMesh m = room_open_px();
    return merge_meshes({m, make_box({0.6, -0.6, 0.0}, {0.6 + 0.05, 0.6, 1.0})});
}

// Seating scenes built from boxes, each paired with a point 10 cm above the
// seat (about where a seated pelvis ends up).
struct InteractionScene {
    std::string name;
    TriMesh mesh;
    Vec3 point;
};

// Seat slab 0.40-0.46 m on two end legs.
inline InteractionScene bench() {
    return {"bench",
            merge_meshes({ground(2.0), make_box({-0.8, -0.22, 0.40}, {0.8, 0.22, 0.46}),
                          make_box({-0.78, -0.2, 0.0}, {-0.68, 0.2, 0.40}), make_box({0.68, -0.2, 0.0}, {0.78, 0.2, 0.40})}),
            Vec3(0.0, -0.08, 0.56)};
}

// Square top 0.55-0.60 m on a central post.
inline InteractionScene stool() {
    return {"stool",
            merge_meshes({ground(2.0), make_box({-0.2, -0.2, 0.55}, {0.2, 0.2, 0.60}),
                          make_box({-0.04, -0.04, 0.0}, {0.04, 0.04, 0.55})}),
            Vec3(0.0, 0.0, 0.70)};
}

// Open ground with a solid block, 0.5 m high, to sit on.
inline InteractionScene ground_with_box() {
    return {"ground_with_box", merge_meshes({ground(2.0), make_box({-0.45, -0.3, 0.0}, {0.45, 0.3, 0.5})}),
            Vec3(0.0, 0.0, 0.6)};
}

}  // namespace hsi::fixture
