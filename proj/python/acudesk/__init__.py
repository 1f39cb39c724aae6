"""Python access to the acudesk volume rendering and needling core.

Structured values (transfer functions, cameras, planes, needles, sessions)
are plain dicts; volumes and images are numpy arrays.
"""

import json

from . import _acudesk as _core
from ._acudesk import AcudeskError, Service, Volume, needle_lengths, preset_scheme

__all__ = [
    "AcudeskError",
    "Service",
    "Volume",
    "align",
    "apply_contrast",
    "apply_transform",
    "create_session",
    "default_render_settings",
    "framing_camera",
    "histogram",
    "insert_needle",
    "load_volume",
    "mutate",
    "needle_lengths",
    "phantom",
    "plane",
    "preset_scheme",
    "preset_transfer_function",
    "project_point_to_plane",
    "render",
    "request",
    "write_nrrd",
]


def _dump(value):
    return json.dumps(value)


def load_volume(path):
    """Load an NRRD file or DICOM directory; returns (volume, warnings)."""
    return _core.load_volume(str(path))


def write_nrrd(volume, path, gzip=False):
    _core.write_nrrd(volume, str(path), gzip)


def phantom(kind, n, spacing_mm=1.0, radius_mm=None):
    if kind == "shells":
        return _core.shells_phantom(n, spacing_mm)
    if kind == "sphere":
        return _core.sphere_phantom(n, spacing_mm, radius_mm if radius_mm is not None else 0.35 * (n - 1) * spacing_mm)
    raise ValueError("kind must be 'shells' or 'sphere'")


def histogram(volume, bins=256):
    return json.loads(volume.histogram(bins))


def apply_contrast(tf, value):
    return _core.apply_contrast(_dump(tf), value)


def preset_transfer_function(name, c_min, c_max, steps=16):
    return json.loads(_core.preset_transfer_function(name, c_min, c_max, steps))


def default_render_settings(volume):
    return json.loads(_core.default_render_settings(volume))


def framing_camera(volume, width, height):
    return json.loads(_core.framing_camera(volume, width, height))


def render(volume, tf=None, settings=None, camera=None, planes=(), size=(256, 256), threads=0):
    """Ray-cast `volume`; returns an (H, W, 4) uint8 array."""
    lo, hi = volume.value_range
    tf = tf or preset_transfer_function("grayscale", lo, hi)
    settings = settings or default_render_settings(volume)
    camera = camera or framing_camera(volume, size[0], size[1])
    return _core.render(volume, _dump(tf), _dump(settings), _dump(camera), [_dump(p) for p in planes], threads)


def plane(plane_id, kind, position, normal):
    return json.loads(_core.plane_from_normal(plane_id, kind, list(position), list(normal)))


def align(source_landmarks, target_landmarks):
    """Similarity transform taking the source landmark box onto the target's."""
    return json.loads(_core.align(_dump(source_landmarks), _dump(target_landmarks)))


def apply_transform(transform, point):
    return tuple(_core.apply_transform(_dump(transform), list(point)))


def insert_needle(needle_id, length_mm, skin_entry, direction, depth_mm):
    return json.loads(_core.insert_needle(needle_id, length_mm, list(skin_entry), list(direction), depth_mm))


def project_point_to_plane(point, plane_dict):
    return tuple(_core.project_point_to_plane(list(point), _dump(plane_dict)))


def create_session(session_id, volume, path, sha256):
    return json.loads(_core.create_session(session_id, volume, path, sha256))


def mutate(session, command):
    """Apply one command dict to a session dict and return the new session."""
    return json.loads(_core.mutate(_dump(session), _dump(command)))


def request(service, method, path, query=None, body=None):
    """In-process API call; returns (status, content_type, body_bytes, headers)."""
    return service.handle(method, path, query or {}, "" if body is None else _dump(body))
