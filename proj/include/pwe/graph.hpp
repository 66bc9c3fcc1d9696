// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pwe/em.hpp"
#include "pwe/geometry.hpp"

namespace pwe {

constexpr double kSpeedOfLight = 299792458.0;

// Directional antenna as a cosine-power efficiency mask around the boresight;
// the exponent is solved so the -3 dB point sits at half the beamwidth.
struct Antenna {
    enum class Kind { Isotropic, CosinePower } kind = Kind::Isotropic;
    Vec3 boresight{0, 0, 1};
    double exponent = 0.0;

    static Antenna isotropic() { return {}; }
    static Antenna cosine_power(const Vec3& boresight, double beamwidth_deg);
    // Power efficiency toward a (unit) world direction; zero behind the antenna plane.
    double efficiency(const Vec3& direction) const;
};

struct NodeRef {
    enum class Kind { Tile, User } kind = Kind::Tile;
    int index = -1;
    bool operator==(const NodeRef& o) const { return kind == o.kind && index == o.index; }
};

struct Link {
    LinkIndex id = -1;
    NodeRef a, b;
    double length_m = 0.0;
    double delay_s = 0.0;        // length / c
    double nlos_factor = 1.0;    // multiplicative power factor in (0,1]
    bool user_link = false;
    bool dead = false;           // tombstone after a user reposition; ids stay stable
    Vec3 user_dir_from_tile;     // frozen tile-to-user direction for user links
};

struct TileNode {
    std::string id;
    TilePlacement placement;
    std::shared_ptr<const Codebook> codebook;  // null for virtual tiles
    std::vector<LinkIndex> links;
};

struct UserNode {
    std::string id;
    Vec3 position;
    Antenna antenna;
    double tx_power_w = 1.0;
    std::optional<std::string> antenna_label;  // MIMO label, carried but not exploited
    std::vector<LinkIndex> links;
};

// Per-tile assignment for one operation round; tiles absent from the map are
// deactivated (natural specular behavior).
struct Configuration {
    std::map<std::string, MergedFunction> assignment;
    int round_index = 0;

    const MergedFunction* find(const std::string& tile_id) const {
        auto it = assignment.find(tile_id);
        return it == assignment.end() ? nullptr : &it->second;
    }
};

// Immutable after build. Links are bidirectional and symmetric; one record
// serves both directions.
class PweGraph {
  public:
    PweGraph() = default;

    // Geometry-free graph over an abstract tile topology (unit link lengths,
    // coated collimating tiles with a default codebook). The scheduling layer
    // is topology-driven, so synthetic instances build directly.
    static PweGraph abstract(int n_tiles, const std::vector<std::pair<int, int>>& edges,
                             double spacing_m = 3.0);

    const std::vector<TileNode>& tiles() const { return tiles_; }
    const std::vector<UserNode>& users() const { return users_; }
    const std::vector<Link>& links() const { return links_; }

    int tile_index(const std::string& id) const;      // -1 when absent
    int user_index(const std::string& id) const;
    const TileNode& tile(int idx) const { return tiles_[idx]; }
    const UserNode& user(int idx) const { return users_[idx]; }
    const Link& link(LinkIndex id) const { return links_[id]; }

    NodeRef other_end(const Link& l, const NodeRef& from) const { return l.a == from ? l.b : l.a; }
    Vec3 position(const NodeRef& n) const {
        return n.kind == NodeRef::Kind::Tile ? tiles_[n.index].placement.center
                                             : users_[n.index].position;
    }
    // Unit vector from a node toward the far end of one of its links.
    Vec3 direction_from(const NodeRef& n, const Link& l) const {
        return (position(other_end(l, n)) - position(n)).normalized();
    }
    TilePortView port_view(int tile_idx) const;

    // LOS state between two users, keyed by sorted (user index) pair.
    std::optional<Visibility> user_user_visibility(int u1, int u2) const;

    // Copy of the graph with one user moved. The user's old links become
    // tombstones (ids never shift, so configurations built against an older
    // snapshot stay resolvable) and fresh links are appended.
    PweGraph with_user_position(const std::string& user_id, const Vec3& position) const;

    // Live user link from a tile to a user, -1 when none.
    LinkIndex user_link_of(int tile_idx, int user_idx) const;

    std::string link_name(LinkIndex id) const;

  private:
    friend PweGraph build_graph(const Floorplan&, const std::vector<TilePlacement>&,
                                const std::vector<UserNode>&,
                                const std::map<std::string, std::shared_ptr<const Codebook>>&,
                                double, const VisibilityOptions&);
    std::vector<TileNode> tiles_;
    std::vector<UserNode> users_;
    std::vector<Link> links_;
    std::map<std::string, int> tile_ids_;
    std::map<std::string, int> user_ids_;
    std::map<std::pair<int, int>, Visibility> user_user_;
    Floorplan plan_;
    double frequency_hz_ = 0.0;
    VisibilityOptions vis_opts_;

    void rebuild_user_links(int user_idx);
};

// Builds the graph: inter-tile links wherever visibility is not blocked
// (never between co-planar tiles), user-tile links only under full LOS, and
// near-LOS attenuation factors attached to links.
PweGraph build_graph(const Floorplan& plan, const std::vector<TilePlacement>& placements,
                     const std::vector<UserNode>& users,
                     const std::map<std::string, std::shared_ptr<const Codebook>>& codebooks,
                     double frequency_hz, const VisibilityOptions& vis_opts = {});

// Tiles holding a user-tile link to the given user (its LOS vicinity).
std::vector<std::string> first_contact_tiles(const PweGraph& graph, const std::string& user_id);

}  // namespace pwe
