"""Multi-view fused implicit 3D fields with tracking, correspondence, and planning."""

from .field import (
    CameraView,
    FieldValue,
    FieldValueBatch,
    FusedField,
    associate_masks,
    build_field,
    evaluate,
    evaluate_batch,
    feature_gradient,
    fusion_gradients,
    sample_view,
    truncated_depth_difference,
    view_weights,
)
from .geometry import Intrinsics, PixelCoord, Pose, bilinear_sample, nearest_sample, project
from .mesh import DecoratedMesh, GridSpec, decorate, export_ply, extract_mesh, load_ply, pca_colorize
from .tracking import KeypointSet, TrackConfig, rigid_project, sample_keypoints, track_step
from .correspondence import (
    GoalPoints,
    GoalSpec,
    feature_distance_map,
    goal_points,
    pair_instances,
    softmax_weights,
)
from .dynamics import (
    PushAction,
    PusherParams,
    TeleportAction,
    available_dynamics,
    get_dynamics,
    pusher_step,
    register_dynamics,
    teleport_step,
)
from .planning import BlockPushEnv, PlanConfig, PlanResult, cost, mpc_loop, mppi_plan, project_to_reference
from .sceneio import SceneFormatError, SceneParams, read_scene, write_scene

__version__ = "0.1.0"
