# Copyright (c) 2026 The omniparse authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates the synthetic screenshots and adapter fixtures under
# tests/data. The outputs are checked in; rerun only when the fixture
# screens change on purpose (and then refresh the goldens).

import json
import pathlib

import cv2
import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
SCREENS = HERE / "screens"
FONT = cv2.FONT_HERSHEY_SIMPLEX


def text(img, s, x, y, scale=0.5, color=(40, 40, 40)):
    cv2.putText(img, s, (x, y), FONT, scale, color, 1, cv2.LINE_AA)


def button(img, x, y, w, h, label, fill):
    cv2.rectangle(img, (x, y), (x + w - 1, y + h - 1), fill, -1)
    text(img, label, x + 14, y + 24, 0.55, (255, 255, 255))


def toggle(img, x, y, on):
    cv2.rectangle(img, (x, y), (x + 47, y + 23), (90, 170, 60) if on else (180, 180, 180), -1)
    cx = x + 35 if on else x + 12
    cv2.circle(img, (cx, y + 11), 9, (255, 255, 255), -1)


def settings_screen():
    img = np.full((320, 480, 3), 250, np.uint8)
    cv2.rectangle(img, (0, 0), (479, 39), (230, 230, 230), -1)
    cv2.arrowedLine(img, (28, 20), (12, 20), (60, 60, 60), 2, tipLength=0.5)  # back
    text(img, "Settings", 44, 27, 0.6)
    cv2.circle(img, (412, 20), 7, (60, 60, 60), 2)  # search
    cv2.line(img, (417, 25), (422, 30), (60, 60, 60), 2)
    cv2.circle(img, (452, 20), 9, (60, 60, 60), 3)  # gear
    cv2.circle(img, (452, 20), 3, (230, 230, 230), -1)
    text(img, "Wi-Fi", 40, 87)
    toggle(img, 400, 70, True)
    text(img, "Bluetooth", 40, 137)
    toggle(img, 400, 120, False)
    cv2.rectangle(img, (40, 180), (59, 199), (60, 60, 60), 2)  # checkbox
    text(img, "Remember me", 70, 195)
    cv2.circle(img, (240, 232), 2, (200, 200, 200), -1)  # decorative dot
    button(img, 40, 260, 100, 36, "Save", (200, 120, 40))
    button(img, 160, 260, 100, 36, "Cancel", (120, 120, 120))
    return img


def login_screen():
    img = np.full((360, 300, 3), 255, np.uint8)
    text(img, "Sign in", 110, 40, 0.7)
    text(img, "Email", 30, 90)
    cv2.rectangle(img, (30, 100), (269, 131), (160, 160, 160), 1)
    text(img, "Password", 30, 160)
    cv2.rectangle(img, (30, 170), (269, 201), (160, 160, 160), 1)
    button(img, 30, 230, 240, 36, "Log in", (40, 120, 220))
    text(img, "Forgot password?", 80, 300, 0.45, (200, 100, 30))
    cv2.circle(img, (270, 30), 10, (100, 100, 100), 2)  # help
    return img


def grid_screen():
    img = np.full((480, 360, 3), 245, np.uint8)
    for j in range(8):
        for i in range(6):
            x, y = 20 + i * 56, 20 + j * 56
            hue = (i * 8 + j) * 3 % 180
            color = cv2.cvtColor(np.uint8([[[hue, 160, 200]]]), cv2.COLOR_HSV2BGR)[0, 0]
            cv2.rectangle(img, (x, y), (x + 39, y + 39), tuple(int(c) for c in color), -1)
    return img


def grid_boxes():
    return [box(20 + i * 56, 20 + j * 56, 40, 40, confidence=round(0.5 + 0.01 * (i + j), 2))
            for j in range(8) for i in range(6)]


def box(x, y, w, h, **kw):
    return dict(x=x, y=y, w=w, h=h, **kw)


def main():
    SCREENS.mkdir(exist_ok=True)
    cv2.imwrite(str(SCREENS / "settings.png"), settings_screen())
    cv2.imwrite(str(SCREENS / "login.png"), login_screen())
    cv2.imwrite(str(SCREENS / "grid.png"), grid_screen())
    cv2.imwrite(str(SCREENS / "blank.png"), np.full((120, 200, 3), 255, np.uint8))

    detector = [
        {"image_id": "settings", "boxes": [
            box(8, 8, 24, 24, confidence=0.81),      # back
            box(400, 8, 24, 24, confidence=0.77),    # search
            box(440, 8, 24, 24, confidence=0.92),    # gear
            box(441, 9, 24, 24, confidence=0.60),    # duplicate of gear, removed by nms
            box(400, 70, 48, 24, confidence=0.88),   # wi-fi toggle
            box(400, 120, 48, 24, confidence=0.86),  # bluetooth toggle
            box(38, 178, 24, 24, confidence=0.74),   # checkbox
            box(236, 228, 8, 8, confidence=0.31),    # decorative dot
            box(40, 260, 100, 36, confidence=0.95),  # save
            box(160, 260, 100, 36, confidence=0.93), # cancel
            box(300, 200, 30, 30, confidence=0.02),  # below threshold
        ]},
        {"image_id": "login", "boxes": [
            box(30, 100, 240, 32, confidence=0.90),  # email field
            box(30, 170, 240, 32, confidence=0.89),  # password field
            box(30, 230, 240, 36, confidence=0.97),  # log in
            box(258, 18, 24, 24, confidence=0.70),   # help
        ]},
        {"image_id": "grid", "boxes": grid_boxes()},
    ]
    ocr = [
        {"image_id": "settings", "lines": [
            box(44, 12, 72, 20, text="Settings", confidence=0.99),
            box(362, 12, 46, 16, text="Find", confidence=0.41),   # partly over the search icon
            box(40, 74, 44, 18, text="Wi-Fi", confidence=0.97),
            box(40, 124, 80, 18, text="Bluetooth", confidence=0.98),
            box(70, 182, 104, 18, text="Remember me", confidence=0.95),
            box(70, 183, 102, 17, text="Remember rne", confidence=0.60),  # duplicate line
            box(54, 268, 44, 20, text="Save", confidence=0.99),
            box(174, 268, 60, 20, text="Cancel", confidence=0.99),
        ]},
        {"image_id": "login", "lines": [
            box(110, 22, 76, 24, text="Sign in", confidence=0.99),
            box(30, 76, 50, 18, text="Email", confidence=0.98),
            box(30, 146, 84, 18, text="Password", confidence=0.98),
            box(44, 238, 70, 22, text="Log in", confidence=0.97),
            box(80, 286, 148, 18, text="Forgot password?", confidence=0.93),
        ]},
    ]
    captions = [
        {"image_id": "settings", "captions": [
            box(8, 8, 24, 24, text="Navigates back to the previous screen."),
            box(400, 8, 24, 24, text="Opens a search field for settings."),
            box(440, 8, 24, 24, text="Opens advanced settings."),
            box(400, 70, 48, 24, text="Toggles Wi-Fi on or off; currently on."),
            box(400, 120, 48, 24, text="Toggles Bluetooth on or off; currently off."),
            box(38, 178, 24, 24, text="Checkbox that keeps the user signed in."),
            box(236, 228, 8, 8, text="This is not an icon."),
        ]},
        {"image_id": "login", "captions": [
            box(30, 100, 240, 32, text="Text field for entering an email address."),
            box(30, 170, 240, 32, text="Text field for entering a password."),
            box(258, 18, 24, 24, text="Opens help for signing in."),
        ]},
        {"image_id": "grid", "default": "Launches an app.", "captions": []},
    ]
    (HERE / "detector_fixture.json").write_text(json.dumps(detector, indent=1) + "\n")
    (HERE / "ocr_fixture.json").write_text(json.dumps(ocr, indent=1) + "\n")
    (HERE / "caption_fixture.json").write_text(json.dumps(captions, indent=1) + "\n")


if __name__ == "__main__":
    main()
