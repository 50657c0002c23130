import pytest

from sms_remote.device import DeviceState, provision_device
from sms_remote.protocol import SharedSecret

SERVER = "+919000000001"
PEER = "+919000000002"
STRANGER = "+919000000009"


@pytest.fixture()
def secret() -> SharedSecret:
    return SharedSecret(activation_command="MYDOB", activation_pin="1989")


@pytest.fixture()
def device_state(secret) -> DeviceState:
    d = provision_device(SERVER, secret, login_pin="4321")
    d.booted = True
    return d
