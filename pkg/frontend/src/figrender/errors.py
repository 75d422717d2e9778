"""Error hierarchy for the figure renderer."""


class RenderError(Exception):
    """Any failure while building a manifest or rendering an image."""


class ManifestError(RenderError):
    """A referenced table is missing, malformed, or the layer list is empty."""
