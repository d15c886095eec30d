"""Lay out a small network and inspect where interference is measured.

Every pair of nodes whose range disks overlap shares a lens-shaped region;
each node of the pair gets one measurement point inside that lens.  Path
gains follow a clamped power law so a point can never pick up gain above
the reference distance value.
"""
import numpy as np

from beamlink import Node, build_scenario, detect_overlaps, lens_center_distance, path_gain

nodes = [
    Node(id=0, position=np.array([0.0, 0.0]), range_radius=6.0),
    Node(id=1, position=np.array([8.0, 0.0]), range_radius=6.0),
    Node(id=2, position=np.array([16.0, 0.0]), range_radius=6.0),
    Node(id=3, position=np.array([40.0, 0.0]), range_radius=6.0),  # isolated
]

pairs = detect_overlaps(nodes)
print("overlapping pairs:", pairs)
print("node 3 overlaps nothing: its disk is 18 m short of node 2's")
print()

scenario = build_scenario(nodes, path_loss_exponent=3.0, reference_distance=1.0)
for region in scenario.overlaps:
    i, j = region.pair
    print(f"pair {i}-{j}: point for {i} at {np.round(region.point_for(i), 3)}, "
          f"point for {j} at {np.round(region.point_for(j), 3)}")

a, c = nodes[0], nodes[1]
print()
print(f"lens center sits {lens_center_distance(a, c):.3f} m from node {a.id} "
      f"along the 0-1 axis")

print()
print("path gain from node 0, exponent 3, clamped at 1 m:")
for d in (0.5, 1.0, 2.0, 4.0, 8.0):
    print(f"  distance {d:>4} m -> gain {path_gain(d, scenario):.6f}")

# points placed off the lens center: offsets are clamped to stay inside
shifted = build_scenario(nodes[:2], point_offsets={(0, 1): (-2.0, 2.0)})
region = shifted.overlaps[0]
print()
print("with point offsets -2/+2 m the pair's points move along the axis:")
print(f"  point for 0: {np.round(region.point_for(0), 3)}")
print(f"  point for 1: {np.round(region.point_for(1), 3)}")
