"""Correspond workspace keypoints to a goal image of a *different* instance.

The workspace holds one mug-stand-in sphere; the goal image shows a larger
sphere of the same procedural category from a novel viewpoint. Matching in
descriptor space lands each keypoint on the corresponding object-local spot
of the goal instance, and heatmaps are saved as PNGs.

Run:  python demos/03_goal_correspondence.py  (outputs under demos/out/)
"""

from pathlib import Path

import numpy as np
from PIL import Image

import fieldfusion as ff
import fieldfusion.synth as synth
from fieldfusion.geometry import Intrinsics, look_at_pose, project_batch

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

spec = synth.ProceduralFeatureSpec(dim=32, seed=21)
cA, rA = np.array([0.0, 0.0, 0.05]), 0.05
cB, rB = np.array([0.02, -0.01, 0.06]), 0.06
workspace = [synth.ground_plane(0.0, category=9, instance=1),
             synth.sphere(cA, rA, category=7, instance=2)]
goal_scene = [synth.ground_plane(0.0, category=9, instance=1),
              synth.sphere(cB, rB, category=7, instance=2)]

cams = synth.corner_cameras((0, 0, 0), radius=0.28, height=0.33)
field = ff.build_field(synth.render_views(workspace, cams, spec), mu=0.02, delta=1e-4)
kps = ff.sample_keypoints(field, instance=2, n_s=12, tau_surf=0.0015)

goal_intr = Intrinsics(fx=500.0, fy=500.0, cx=319.5, cy=239.5, width=640, height=480)
goal_pose = look_at_pose(np.array([0.12, 0.10, 0.45]), cB)  # held-out viewpoint
gview = synth.render_views(goal_scene, [(goal_pose, goal_intr)], spec)[0]
goal = ff.GoalSpec(goal_features=gview.features, reference_pose=goal_pose,
                   reference_intr=goal_intr, goal_mask_ids=gview.mask_ids)

gpts = ff.goal_points(field, kps, goal, return_heatmaps=True)

# ground truth: the matching object-local point on the goal instance
corr = cB + (kps.points - cA) / rA * rB
uv, _, _, _ = project_batch(corr, goal_pose, goal_intr)
err = np.linalg.norm(gpts.points_2d - uv, axis=1)
for j, (p, e) in enumerate(zip(gpts.points_2d, err)):
    print(f"keypoint {j:2d}: goal point ({p[0]:6.1f}, {p[1]:6.1f}) px   "
          f"err vs corresponding pixel {e:4.2f} px")
print(f"median error: {np.median(err):.2f} px")

for j, hm in enumerate(gpts.heatmaps[:4]):
    img = (hm / hm.max() * 255).astype(np.uint8)
    Image.fromarray(img, mode="L").save(out / f"heatmap_{j}.png")
print(f"wrote {min(4, len(gpts.heatmaps))} heatmaps to {out}")
