// SPDX-License-Identifier: Apache-2.0
#include "pwe/graph.hpp"

#include <algorithm>
#include <cmath>

#include "pwe/errors.hpp"

namespace pwe {

namespace {
// Offset a tile center slightly into the room so rays leaving the face do not
// graze the slab the surface sits on.
constexpr double kFaceOffset = 1e-4;

Vec3 probe_point(const TilePlacement& t) { return t.center + t.normal * kFaceOffset; }

bool coplanar(const TilePlacement& a, const TilePlacement& b) {
    const double align = std::abs(a.normal.dot(b.normal));
    if (align < 1.0 - 1e-9) return false;
    const double offset = std::abs(a.normal.dot(b.center - a.center));
    return offset < 1e-6;
}
}  // namespace

Antenna Antenna::cosine_power(const Vec3& boresight, double beamwidth_deg) {
    Antenna a;
    a.kind = Kind::CosinePower;
    a.boresight = boresight.normalized();
    const double half = beamwidth_deg * M_PI / 180.0 / 2.0;
    // cos^m(half) = 1/2 at the -3 dB point
    a.exponent = std::log(0.5) / std::log(std::cos(half));
    return a;
}

double Antenna::efficiency(const Vec3& direction) const {
    if (kind == Kind::Isotropic) return 1.0;
    const double c = boresight.dot(direction.normalized());
    if (c <= 0.0) return 0.0;
    return std::pow(c, exponent);
}

int PweGraph::tile_index(const std::string& id) const {
    auto it = tile_ids_.find(id);
    return it == tile_ids_.end() ? -1 : it->second;
}

int PweGraph::user_index(const std::string& id) const {
    auto it = user_ids_.find(id);
    return it == user_ids_.end() ? -1 : it->second;
}

TilePortView PweGraph::port_view(int tile_idx) const {
    const TileNode& t = tiles_[tile_idx];
    TilePortView v;
    v.placement = &t.placement;
    v.ports.reserve(t.links.size());
    const NodeRef self{NodeRef::Kind::Tile, tile_idx};
    for (LinkIndex li : t.links) {
        const Link& l = links_[li];
        v.ports.push_back({li, direction_from(self, l), l.user_link});
    }
    return v;
}

std::optional<Visibility> PweGraph::user_user_visibility(int u1, int u2) const {
    auto key = std::minmax(u1, u2);
    auto it = user_user_.find({key.first, key.second});
    if (it == user_user_.end()) return std::nullopt;
    return it->second;
}

std::string PweGraph::link_name(LinkIndex id) const {
    const Link& l = links_[id];
    auto name = [&](const NodeRef& n) {
        return n.kind == NodeRef::Kind::Tile ? tiles_[n.index].id : users_[n.index].id;
    };
    return name(l.a) + "~" + name(l.b);
}

void PweGraph::rebuild_user_links(int user_idx) {
    UserNode& u = users_[user_idx];

    // Tombstone the user's old links; every other id stays put.
    for (LinkIndex li : u.links) {
        links_[li].dead = true;
        for (const NodeRef& n : {links_[li].a, links_[li].b}) {
            if (n.kind != NodeRef::Kind::Tile) continue;
            auto& tl = tiles_[n.index].links;
            tl.erase(std::remove(tl.begin(), tl.end(), li), tl.end());
        }
    }
    u.links.clear();

    // New user-tile links: full LOS only.
    for (int ti = 0; ti < static_cast<int>(tiles_.size()); ++ti) {
        const Visibility vis =
            visibility(u.position, probe_point(tiles_[ti].placement), plan_, frequency_hz_, vis_opts_);
        if (vis.kind != VisibilityKind::LOS) continue;
        Link l;
        l.id = static_cast<LinkIndex>(links_.size());
        l.a = NodeRef{NodeRef::Kind::User, user_idx};
        l.b = NodeRef{NodeRef::Kind::Tile, ti};
        l.length_m = u.position.distance(tiles_[ti].placement.center);
        l.delay_s = l.length_m / kSpeedOfLight;
        l.nlos_factor = 1.0;
        l.user_link = true;
        l.user_dir_from_tile = (u.position - tiles_[ti].placement.center).normalized();
        tiles_[ti].links.push_back(l.id);
        u.links.push_back(l.id);
        links_.push_back(l);
    }

    // Refresh user-user visibility entries involving this user.
    for (int other = 0; other < static_cast<int>(users_.size()); ++other) {
        if (other == user_idx) continue;
        auto key = std::minmax(user_idx, other);
        if (u.position.distance(users_[other].position) <= 0.0) {
            user_user_.erase({key.first, key.second});
            continue;
        }
        user_user_[{key.first, key.second}] =
            visibility(u.position, users_[other].position, plan_, frequency_hz_, vis_opts_);
    }
}

PweGraph PweGraph::with_user_position(const std::string& user_id, const Vec3& position) const {
    const int idx = user_index(user_id);
    if (idx < 0) throw UnknownUser("graph has no user '" + user_id + "'");
    PweGraph g = *this;
    g.users_[idx].position = position;
    g.rebuild_user_links(idx);
    return g;
}

LinkIndex PweGraph::user_link_of(int tile_idx, int user_idx) const {
    for (LinkIndex li : tiles_[tile_idx].links) {
        const Link& l = links_[li];
        if (!l.user_link || l.dead) continue;
        for (const NodeRef& n : {l.a, l.b})
            if (n.kind == NodeRef::Kind::User && n.index == user_idx) return li;
    }
    return -1;
}

PweGraph build_graph(const Floorplan& plan, const std::vector<TilePlacement>& placements,
                     const std::vector<UserNode>& users,
                     const std::map<std::string, std::shared_ptr<const Codebook>>& codebooks,
                     double frequency_hz, const VisibilityOptions& vis_opts) {
    PweGraph g;
    g.plan_ = plan;
    g.frequency_hz_ = frequency_hz;
    g.vis_opts_ = vis_opts;

    for (const auto& p : placements) {
        if (g.tile_ids_.count(p.tile_id))
            throw DuplicateId("duplicate tile id '" + p.tile_id + "'");
        TileNode t;
        t.id = p.tile_id;
        t.placement = p;
        if (p.coated) {
            auto it = codebooks.find(p.codebook_id);
            if (it == codebooks.end())
                throw MissingCodebook("coated tile '" + p.tile_id + "' references codebook '" +
                                      p.codebook_id + "' which was not provided");
            t.codebook = it->second;
        }
        g.tile_ids_[t.id] = static_cast<int>(g.tiles_.size());
        g.tiles_.push_back(std::move(t));
    }
    for (const auto& u : users) {
        if (g.user_ids_.count(u.id) || g.tile_ids_.count(u.id))
            throw DuplicateId("duplicate user id '" + u.id + "'");
        g.user_ids_[u.id] = static_cast<int>(g.users_.size());
        g.users_.push_back(u);
        g.users_.back().links.clear();
    }

    auto add_link = [&](NodeRef a, NodeRef b, double length, double nlos, bool user_link) {
        Link l;
        l.id = static_cast<LinkIndex>(g.links_.size());
        l.a = a;
        l.b = b;
        l.length_m = length;
        l.delay_s = length / kSpeedOfLight;
        l.nlos_factor = nlos;
        l.user_link = user_link;
        if (user_link) {
            const Vec3 tile_pos =
                a.kind == NodeRef::Kind::Tile ? g.tiles_[a.index].placement.center
                                              : g.tiles_[b.index].placement.center;
            const Vec3 user_pos = a.kind == NodeRef::Kind::User ? g.users_[a.index].position
                                                                : g.users_[b.index].position;
            l.user_dir_from_tile = (user_pos - tile_pos).normalized();
        }
        if (a.kind == NodeRef::Kind::Tile) g.tiles_[a.index].links.push_back(l.id);
        else g.users_[a.index].links.push_back(l.id);
        if (b.kind == NodeRef::Kind::Tile) g.tiles_[b.index].links.push_back(l.id);
        else g.users_[b.index].links.push_back(l.id);
        g.links_.push_back(l);
    };

    const int nt = static_cast<int>(g.tiles_.size());
    for (int i = 0; i < nt; ++i) {
        for (int j = i + 1; j < nt; ++j) {
            const auto& pi = g.tiles_[i].placement;
            const auto& pj = g.tiles_[j].placement;
            if (coplanar(pi, pj)) continue;
            const Visibility vis =
                visibility(probe_point(pi), probe_point(pj), plan, frequency_hz, vis_opts);
            if (vis.kind == VisibilityKind::Blocked) continue;
            add_link(NodeRef{NodeRef::Kind::Tile, i}, NodeRef{NodeRef::Kind::Tile, j},
                     pi.center.distance(pj.center), vis.attenuation_factor, false);
        }
    }
    for (int ui = 0; ui < static_cast<int>(g.users_.size()); ++ui) {
        for (int ti = 0; ti < nt; ++ti) {
            const Visibility vis = visibility(g.users_[ui].position,
                                              probe_point(g.tiles_[ti].placement), plan,
                                              frequency_hz, vis_opts);
            if (vis.kind != VisibilityKind::LOS) continue;  // user links need full LOS
            add_link(NodeRef{NodeRef::Kind::User, ui}, NodeRef{NodeRef::Kind::Tile, ti},
                     g.users_[ui].position.distance(g.tiles_[ti].placement.center), 1.0, true);
        }
    }
    for (int u1 = 0; u1 < static_cast<int>(g.users_.size()); ++u1) {
        for (int u2 = u1 + 1; u2 < static_cast<int>(g.users_.size()); ++u2) {
            g.user_user_[{u1, u2}] = visibility(g.users_[u1].position, g.users_[u2].position,
                                                plan, frequency_hz, vis_opts);
        }
    }
    return g;
}

PweGraph PweGraph::abstract(int n_tiles, const std::vector<std::pair<int, int>>& edges,
                            double spacing_m) {
    PweGraph g;
    g.frequency_hz_ = 60e9;
    auto cb = std::make_shared<Codebook>(4, 8, 0.8, 1.0, 60e9);
    for (int i = 0; i < n_tiles; ++i) {
        TileNode t;
        t.id = "t" + std::to_string(i);
        t.placement.tile_id = t.id;
        t.placement.surface_id = "abstract";
        t.placement.center = {spacing_m * i, 0.0, 1.5};
        t.placement.normal = {0, 1, 0};
        t.placement.axis_u = {1, 0, 0};
        t.placement.axis_v = {0, 0, 1};
        t.placement.side_length = 1.0;
        t.placement.coated = true;
        t.placement.collimating = true;
        t.codebook = cb;
        g.tile_ids_[t.id] = i;
        g.tiles_.push_back(std::move(t));
    }
    for (const auto& [u, v] : edges) {
        Link l;
        l.id = static_cast<LinkIndex>(g.links_.size());
        l.a = NodeRef{NodeRef::Kind::Tile, u};
        l.b = NodeRef{NodeRef::Kind::Tile, v};
        l.length_m = spacing_m * std::abs(u - v);
        l.delay_s = l.length_m / kSpeedOfLight;
        l.nlos_factor = 1.0;
        g.tiles_[u].links.push_back(l.id);
        g.tiles_[v].links.push_back(l.id);
        g.links_.push_back(l);
    }
    return g;
}

std::vector<std::string> first_contact_tiles(const PweGraph& graph, const std::string& user_id) {
    const int ui = graph.user_index(user_id);
    if (ui < 0) throw UnknownUser("graph has no user '" + user_id + "'");
    std::vector<std::string> out;
    for (LinkIndex li : graph.user(ui).links) {
        const Link& l = graph.link(li);
        const NodeRef other = graph.other_end(l, NodeRef{NodeRef::Kind::User, ui});
        if (other.kind == NodeRef::Kind::Tile) out.push_back(graph.tile(other.index).id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace pwe
