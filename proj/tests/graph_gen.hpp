// Random symbolic scene graphs for PDDL round-trip tests.
#pragma once

#include "srp/rng.hpp"
#include "srp/scenegraph.hpp"

namespace srp::testgen {

inline std::vector<scenegraph::Instance> random_instances(uint64_t seed, int n) {
    rng::Stream st(rng::stream_key(seed, 0x1157));
    std::vector<scenegraph::Instance> out;
    for (int i = 0; i < n; ++i) {
        scenegraph::Instance inst;
        inst.id = std::string(1, static_cast<char>('a' + i));
        inst.model_id = "m" + std::to_string(i % 3);
        inst.concave = st.uniform() < 0.25;
        inst.pose.position = geom::Vec3(st.uniform(-0.3, 0.3), st.uniform(-0.3, 0.3), 0.75);
        out.push_back(std::move(inst));
    }
    return out;
}

// Physically-shaped random graph over the given instances: a support forest
// (in-edges only under concave parents), optional virtual regions with
// has/in atoms, clear computed from children.
inline scenegraph::SceneGraph graph_over(const std::vector<scenegraph::Instance>& instances,
                                         uint64_t seed) {
    rng::Stream st(rng::stream_key(seed, 0x62A9));
    scenegraph::SceneGraph g;
    g.table_height = 0.7;
    std::vector<std::string> ids;
    for (const auto& inst : instances) {
        g.instances[inst.id] = inst;
        g.axioms.insert(scenegraph::exist(inst.id));
        ids.push_back(inst.id);
    }
    const int n = static_cast<int>(ids.size());

    std::set<std::string> occupied;
    for (int i = 0; i < n; ++i) {
        // parent: table, or any earlier instance (multiple children allowed)
        int pick = static_cast<int>(st.uniform_index(static_cast<uint64_t>(i + 1)));
        if (pick == i) {
            g.axioms.insert(scenegraph::on(ids[i], scenegraph::kTableId));
        } else {
            const auto& parent = g.instances.at(ids[pick]);
            g.axioms.insert(parent.concave ? scenegraph::in(ids[i], parent.id)
                                           : scenegraph::on(ids[i], parent.id));
            occupied.insert(parent.id);
        }
    }
    for (const auto& id : ids)
        if (!occupied.count(id)) g.axioms.insert(scenegraph::clear(id));

    // up to two regions
    int n_regions = static_cast<int>(st.uniform_index(3));
    for (int r = 0; r < n_regions; ++r) {
        std::string region = "g" + std::to_string(r + 1);
        const std::string& parent = ids[st.uniform_index(ids.size())];
        g.regions.insert(region);
        g.axioms.insert(scenegraph::has(parent, region));
        if (st.uniform() < 0.5) {
            const std::string& child = ids[st.uniform_index(ids.size())];
            g.axioms.insert(scenegraph::in(region, child));
        }
    }
    return g;
}

inline scenegraph::SceneGraph random_scene_graph(uint64_t seed) {
    rng::Stream st(rng::stream_key(seed, 0x5EED));
    int n = 2 + static_cast<int>(st.uniform_index(6));
    return graph_over(random_instances(seed, n), rng::stream_key(seed, 1));
}

// Two graphs over one shared instance set: what emit_pddl expects.
inline std::pair<scenegraph::SceneGraph, scenegraph::SceneGraph> random_graph_pair(uint64_t seed) {
    rng::Stream st(rng::stream_key(seed, 0x5EED));
    int n = 2 + static_cast<int>(st.uniform_index(6));
    auto instances = random_instances(seed, n);
    return {graph_over(instances, rng::stream_key(seed, 1)),
            graph_over(instances, rng::stream_key(seed, 2))};
}

}  // namespace srp::testgen
