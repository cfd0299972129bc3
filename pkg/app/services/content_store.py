"""Content-addressed blob storage."""

import hashlib
import logging

from app.models.registry import ContentStore
from app.schemas.common import raise_protocol_error

logger = logging.getLogger(__name__)


def canonical_bytes(blob: bytes | str) -> bytes:
    """Canonical blob encoding: UTF-8 text with line endings normalized to LF."""
    data = blob.encode("utf-8") if isinstance(blob, str) else bytes(blob)
    return data.replace(b"\r\n", b"\n").replace(b"\r", b"\n")


def address_of(blob: bytes | str) -> str:
    """Lowercase-hex SHA-256 of the canonical encoding."""
    return hashlib.sha256(canonical_bytes(blob)).hexdigest()


def put(store: ContentStore, blob: bytes | str) -> str:
    """
    Publish a blob and return its content address.

    Idempotent; publishing an unhosted blob again re-hosts it.

    Args:
        store: Content store to mutate
        blob: Raw bytes or text

    Returns:
        Content address of the blob
    """
    data = canonical_bytes(blob)
    address = hashlib.sha256(data).hexdigest()
    if address not in store.blobs:
        store.blobs[address] = data
        logger.debug(f"Stored blob {address[:12]} ({len(data)} bytes)")
    store.hosted[address] = True
    return address


def get(store: ContentStore, address: str) -> bytes:
    """
    Fetch a blob by address.

    Raises:
        ProtocolError: NOT_FOUND if never stored or no longer hosted
    """
    if address not in store.blobs or not store.hosted.get(address, False):
        raise_protocol_error(
            code="NOT_FOUND",
            message=f"No host serves content {address}",
            details={"address": address},
        )
    return store.blobs[address]


def contains(store: ContentStore, address: str) -> bool:
    """Whether a blob is currently retrievable."""
    return address in store.blobs and store.hosted.get(address, False)


def set_hosted(store: ContentStore, address: str, hosted: bool) -> None:
    """
    Pin or unpin the sole host of a stored blob.

    Raises:
        ProtocolError: NOT_FOUND if the address was never stored
    """
    if address not in store.blobs:
        raise_protocol_error(
            code="NOT_FOUND",
            message=f"Content {address} was never stored",
            details={"address": address},
        )
    store.hosted[address] = hosted
    logger.info(f"Content {address[:12]} hosted={hosted}")
