"""SMS remote access and anti-theft protocol: device agent, client, guard."""
