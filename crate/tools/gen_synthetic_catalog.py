"""Writes data/synthetic_catalog.json (run from the repo root)."""
import json

S, N, B, D, DT, U, I = "String", "Number", "Boolean", "Date", "Date with time", "URL", "Image URL"

def f(slug, label=None, required=True, dt=S, helper=None):
    d = {"label": label or slug.replace("_", " ").capitalize(), "slug": slug, "required": required, "data_type": dt}
    if helper:
        d["helper_text"] = helper
    return d

def i(slug, dt=S, example=None):
    d = {"slug": slug, "data_type": dt}
    if example:
        d["example"] = example
    return d

STOCK_INGREDIENTS = [i("StockName", S, "GOOG"), i("Price", N, "171.20"), i("PercentageChange", N, "2.4"), i("CheckTime", DT, "March 3, 2026 at 04:00PM")]

T = [
 # finance
 ("stocks.price_rises_above", "Price rises above", "Stocks", "Finance & payments",
  "This Trigger fires when the price of a stock rises above a target value you specify.",
  [f("symbol", "Ticker symbol"), f("price", "Price", dt=N)], STOCK_INGREDIENTS),
 ("stocks.todays_price_rises_by_percentage", "Today's price rises by percentage", "Stocks", "Finance & payments",
  "This Trigger fires when the price of a stock rises by a given percentage during the day.",
  [f("symbol", "Ticker symbol"), f("percentage", "Percentage", dt=N)], STOCK_INGREDIENTS),
 ("stocks.price_drops_below", "Price drops below", "Stocks", "Finance & payments",
  "This Trigger fires when the price of a stock drops below a value you specify.",
  [f("symbol", "Ticker symbol"), f("price", "Price", dt=N)], STOCK_INGREDIENTS),
 ("stocks.todays_closing_price", "Today's closing price", "Stocks", "Finance & payments",
  "This Trigger fires once a day at market close with a stock's closing quote.",
  [f("symbol", "Ticker symbol")], STOCK_INGREDIENTS),
 ("crypto.btc_above", "Bitcoin exchange rate above", "Coinbase", "Finance & payments",
  "This Trigger fires when the exchange rate of bitcoin goes above a value.",
  [f("amount", "Amount", dt=N)], [i("Rate", N), i("Currency"), i("CheckedAt", DT)]),
 ("bank.new_transaction", "New transaction", "Monzo", "Finance & payments",
  "This Trigger fires every time a card payment is made from your account.",
  [], [i("Merchant"), i("Amount", N), i("Currency"), i("CreatedAt", DT)]),
 # smart home
 ("hue.lights_turned_on", "Lights turned on", "Philips Hue", "Smart home",
  "This Trigger fires when a Hue lamp is switched on.",
  [f("lamp", "Which lamp?")], [i("DeviceName"), i("OccurredAt", DT)]),
 ("nest.temperature_rises_above", "Temperature rises above", "Nest Thermostat", "Smart home",
  "This Trigger fires when the indoor temperature rises above a threshold.",
  [f("threshold", "Temperature", dt=N)], [i("Temperature", N), i("Humidity", N), i("DeviceName"), i("MeasuredAt", DT)]),
 ("nest.away_mode", "Set to away", "Nest Thermostat", "Smart home",
  "This Trigger fires when your home is set to Away.",
  [], [i("HomeName"), i("OccurredAt", DT)]),
 ("ring.new_motion", "New motion detected", "Ring", "Smart home",
  "This Trigger fires when your doorbell camera detects motion.",
  [], [i("DeviceName"), i("SnapshotUrl", I), i("DetectedAt", DT)]),
 ("ring.doorbell_pressed", "Doorbell pressed", "Ring", "Smart home",
  "This Trigger fires when someone rings your doorbell.",
  [], [i("DeviceName"), i("PressedAt", DT)]),
 ("smartthings.door_opened", "Door opened", "SmartThings", "Smart home",
  "This Trigger fires when a contact sensor reports that a door was opened.",
  [f("sensor", "Which sensor?")], [i("DeviceName"), i("OpenedAt", DT)]),
 ("netatmo.co2_above", "Carbon dioxide level rises above", "Netatmo Weather Station", "Smart home",
  "This Trigger fires when the indoor CO2 reading exceeds a level you set.",
  [f("level", "CO2 level", dt=N)], [i("Co2", N), i("Temperature", N), i("MeasuredAt", DT)]),
 # weather
 ("weather.rain_tomorrow", "Rain tomorrow", "Weather Underground", "Weather",
  "This Trigger fires at 6 PM if rain is in the forecast for tomorrow.",
  [f("location", "Location")], [i("Condition"), i("HighTemp", N), i("LowTemp", N), i("ForecastUrl", U)]),
 ("weather.current_temp_drops_below", "Current temperature drops below", "Weather Underground", "Weather",
  "This Trigger fires when the outside temperature drops below a value.",
  [f("location", "Location"), f("threshold", "Temperature", dt=N)], [i("Temperature", N), i("Condition"), i("CheckTime", DT)]),
 ("weather.sunrise", "Sunrise", "Weather Underground", "Weather",
  "This Trigger fires at sunrise at your location.",
  [f("location", "Location")], [i("SunriseAt", DT), i("Condition"), i("ForecastUrl", U)]),
 ("weather.uv_index_rises", "UV index rises above", "Weather Underground", "Weather",
  "This Trigger fires when the UV index rises above a level.",
  [f("location", "Location"), f("level", "UV index", dt=N)], [i("UvIndex", N), i("CheckTime", DT)]),
 # social
 ("twitter.new_tweet_by_you", "New tweet by you", "Twitter", "Social networks",
  "This Trigger fires every time you post a new tweet.",
  [], [i("Text"), i("UserName"), i("LinkToTweet", U), i("CreatedAt", DT)]),
 ("twitter.new_mention", "New mention of you", "Twitter", "Social networks",
  "This Trigger fires every time you are mentioned in a tweet.",
  [], [i("Text"), i("UserName"), i("LinkToTweet", U), i("CreatedAt", DT)]),
 ("instagram.new_photo_by_you", "Any new photo by you", "Instagram", "Social networks",
  "This Trigger fires every time you share a new photo.",
  [], [i("Caption"), i("Url", U), i("SourceUrl", I), i("CreatedAt", DT)]),
 ("facebook.new_status", "New status message by you", "Facebook", "Social networks",
  "This Trigger fires every time you post a new status message.",
  [], [i("Message"), i("From"), i("Link", U), i("CreatedAt", DT)]),
 ("reddit.new_hot_post", "New hot post in subreddit", "Reddit", "Social networks",
  "This Trigger fires when a post reaches the hot list of a subreddit.",
  [f("subreddit", "Subreddit")], [i("Title"), i("Content"), i("Author"), i("PostUrl", U)]),
 ("youtube.new_liked_video", "New liked video", "YouTube", "Photo & video",
  "This Trigger fires every time you like a video.",
  [], [i("Title"), i("Description"), i("Url", U), i("ThumbnailUrl", I)]),
 # news
 ("rss.new_feed_item", "New feed item", "RSS Feed", "News & information",
  "This Trigger fires every time a new item is published in a feed you specify.",
  [f("feed_url", "Feed URL", dt=U)], [i("EntryTitle"), i("EntryUrl", U), i("EntryContent"), i("EntryAuthor"), i("EntryPublished", DT)]),
 ("nyt.new_top_story", "New top story", "The New York Times", "News & information",
  "This Trigger fires every time a new top story is published in a section.",
  [f("section", "Section")], [i("Title"), i("Blurb"), i("ArticleUrl", U), i("ImageUrl", I), i("PublishedDate", DT)]),
 ("nasa.astronomy_picture", "Astronomy picture of the day", "NASA", "News & information",
  "This Trigger fires every day with NASA's astronomy picture.",
  [], [i("Title"), i("Explanation"), i("ImageUrl", I), i("Date", D)]),
 # health
 ("fitbit.daily_step_goal", "Daily step goal achieved", "Fitbit", "Health & fitness",
  "This Trigger fires when you reach your daily step goal.",
  [], [i("Steps", N), i("Goal", N), i("Date", D)]),
 ("fitbit.new_sleep_logged", "New sleep logged", "Fitbit", "Health & fitness",
  "This Trigger fires every time a sleep session is logged.",
  [], [i("MinutesAsleep", N), i("Efficiency", N), i("EndTime", DT)]),
 ("strava.new_activity", "New activity by you", "Strava", "Health & fitness",
  "This Trigger fires every time you complete a run or ride.",
  [], [i("Name"), i("Distance", N), i("Duration", N), i("ActivityUrl", U), i("StartedAt", DT)]),
 ("withings.new_weight", "New weight measurement", "Withings", "Health & fitness",
  "This Trigger fires when your smart scale records a new weight.",
  [], [i("Weight", N), i("FatPercentage", N), i("MeasuredAt", DT)]),
 # productivity / email / calendar / storage
 ("gmail.new_email", "Any new email in inbox", "Gmail", "Email",
  "This Trigger fires every time a new email arrives in your inbox.",
  [], [i("FromAddress"), i("Subject"), i("BodyPlain"), i("ReceivedAt", DT)]),
 ("gmail.new_starred_email", "New starred email", "Gmail", "Email",
  "This Trigger fires every time you star an email.",
  [], [i("FromAddress"), i("Subject"), i("BodyPlain"), i("ReceivedAt", DT)]),
 ("gcal.event_starts", "Event from search starts", "Google Calendar", "Calendars & scheduling",
  "This Trigger fires shortly before an event matching your search starts.",
  [f("query", "Search for")], [i("Title"), i("Description"), i("Where"), i("Starts", DT)]),
 ("gcal.new_event", "New event added", "Google Calendar", "Calendars & scheduling",
  "This Trigger fires every time a new event is added to your calendar.",
  [], [i("Title"), i("Description"), i("Where"), i("Starts", DT), i("EventUrl", U)]),
 ("datetime.every_day_at", "Every day at", "Date & Time", "Calendars & scheduling",
  "This Trigger fires every single day at a specific time set by you.",
  [f("time", "Time", dt=DT)], [i("CheckTime", DT)]),
 ("datetime.every_hour", "Every hour at", "Date & Time", "Calendars & scheduling",
  "This Trigger fires once an hour at the minute you choose.",
  [f("minute", "Minute", dt=N)], [i("CheckTime", DT)]),
 ("todoist.new_completed_task", "New completed task", "Todoist", "Productivity",
  "This Trigger fires every time you complete a task.",
  [], [i("TaskContent"), i("ProjectName"), i("CompletedAt", DT)]),
 ("trello.card_added", "Card added to board", "Trello", "Productivity",
  "This Trigger fires every time a new card is added to a board.",
  [f("board", "Board")], [i("CardTitle"), i("CardDescription"), i("CardUrl", U)]),
 ("github.new_issue", "New issue assigned to you", "GitHub", "Productivity",
  "This Trigger fires every time a repository issue is assigned to you.",
  [], [i("Title"), i("Body"), i("IssueUrl", U), i("Repository")]),
 ("dropbox.new_file", "New file in your folder", "Dropbox", "Cloud storage",
  "This Trigger fires every time a file is added to a folder.",
  [f("path", "Folder path")], [i("FileName"), i("FileUrl", U), i("AddedAt", DT)]),
 ("gdrive.new_file", "New file in folder", "Google Drive", "Cloud storage",
  "This Trigger fires every time a file is created in a folder.",
  [f("folder", "Folder")], [i("Filename"), i("FileUrl", U), i("CreatedAt", DT)]),
 ("sheets.new_row", "New row added to spreadsheet", "Google Sheets", "Productivity",
  "This Trigger fires when a new row is added to a spreadsheet.",
  [f("spreadsheet", "Spreadsheet")], [i("RowContent"), i("SpreadsheetUrl", U), i("UpdatedAt", DT)]),
 # location / phone
 ("location.enter_area", "You enter an area", "Location", "Location",
  "This Trigger fires every time you enter an area you specify.",
  [f("area", "Area")], [i("LocationMapUrl", U), i("OccurredAt", DT)]),
 ("location.exit_area", "You exit an area", "Location", "Location",
  "This Trigger fires every time you leave an area you specify.",
  [f("area", "Area")], [i("LocationMapUrl", U), i("OccurredAt", DT)]),
 ("android.missed_call", "Missed a phone call", "Android Phone Call", "Communication",
  "This Trigger fires when you miss a phone call.",
  [], [i("FromNumber"), i("OccurredAt", DT)]),
 ("android.new_sms", "Receive an SMS", "Android SMS", "Communication",
  "This Trigger fires every time a text message arrives on your phone.",
  [], [i("FromNumber"), i("Text"), i("ReceivedAt", DT)]),
 ("slack.new_message_in_channel", "New message in channel", "Slack", "Communication",
  "This Trigger fires every time a message is posted in a channel.",
  [f("channel", "Channel")], [i("Text"), i("UserName"), i("PostedAt", DT)]),
 # music / video
 ("spotify.new_saved_track", "New saved track", "Spotify", "Music",
  "This Trigger fires every time you save a song to your library.",
  [], [i("TrackName"), i("ArtistName"), i("AlbumName"), i("TrackUrl", U)]),
 ("spotify.new_track_in_playlist", "New track added to a playlist", "Spotify", "Music",
  "This Trigger fires every time a song is added to a playlist.",
  [f("playlist", "Playlist")], [i("TrackName"), i("ArtistName"), i("TrackUrl", U)]),
 ("soundcloud.new_track_by_artist", "New public track by artist", "SoundCloud", "Music",
  "This Trigger fires every time an artist you follow uploads music.",
  [f("artist", "Artist")], [i("Title"), i("ArtistName"), i("TrackUrl", U)]),
]

A = [
 # smart home
 ("hue.change_light_mode", "Turn on / change light mode", "Philips Hue", "Smart home",
  "This Action will turn on your lights and change them to the colour or mode you choose.",
  [f("light", "Which lights?", helper="Select one or more lights"), f("color", "Color value", helper="Color name or hex code")]),
 ("hue.turn_off", "Turn off lights", "Philips Hue", "Smart home",
  "This Action will turn off the lights you select.",
  [f("lamp", "Which lamps?")]),
 ("hue.blink", "Blink lights", "Philips Hue", "Smart home",
  "This Action will briefly blink the lights you select.",
  [f("lamp", "Which lamps?")]),
 ("lifx.breathe", "Breathe lights effect", "LIFX", "Smart home",
  "This Action will slowly pulse your lights between two colours.",
  [f("bulbs", "Bulbs"), f("colour_a", "First colour")]),
 ("lifx.change_colour", "Change colour of lights", "LIFX", "Smart home",
  "This Action will change the colour of the LIFX lights you select.",
  [f("bulbs", "Bulbs"), f("colour", "Colour")]),
 ("nest.set_temperature", "Set temperature", "Nest Thermostat", "Smart home",
  "This Action will set your thermostat to the temperature you specify.",
  [f("device", "Thermostat"), f("target", "Target", dt=N)]),
 ("smartthings.lock", "Lock", "SmartThings", "Smart home",
  "This Action will lock the smart locks you choose.",
  [f("lock", "Which lock?")]),
 ("wemo.switch_on", "Turn on switch", "WeMo Smart Plug", "Smart home",
  "This Action will switch on a smart plug.",
  [f("plug", "Which plug?")]),
 ("roomba.start_cleaning", "Start cleaning", "iRobot", "Smart home",
  "This Action will start a cleaning job on your robot vacuum.",
  [f("robot", "Robot")]),
 # notifications / communication
 ("notifications.send", "Send a notification from the app", "Notifications", "Communication",
  "This Action will send a notification with a message of your choice.",
  [f("message", "Message")]),
 ("notifications.send_rich", "Send a rich notification", "Notifications", "Communication",
  "This Action will send a notification with a title, image and link.",
  [f("message", "Message"), f("title", "Title", required=False), f("image_url", "Image URL", required=False, dt=I), f("link_url", "Link URL", required=False, dt=U)]),
 ("sms.send_me", "Send me an SMS", "SMS", "Communication",
  "This Action will send an SMS to your phone number.",
  [f("message", "Message")]),
 ("slack.post_to_channel", "Post a message in a channel", "Slack", "Communication",
  "This Action will post a message in a channel of your workspace.",
  [f("channel", "Which channel?"), f("message", "Message"), f("title", "Title", required=False)]),
 ("telegram.send_message", "Send message", "Telegram", "Communication",
  "This Action will send a message from a bot in a chat.",
  [f("chat", "Chat"), f("text", "Message text")]),
 ("android.set_ringtone_volume", "Set ringtone volume", "Android Device", "Communication",
  "This Action will set the ringtone volume on your phone.",
  [f("volume", "Volume", dt=N)]),
 # email
 ("gmail.send_email", "Send an email", "Gmail", "Email",
  "This Action will send an email to up to twenty recipients.",
  [f("to_address", "To address"), f("subject", "Subject"), f("body", "Body"), f("attachment_url", "Attachment URL", required=False, dt=U)]),
 ("email.send_me", "Send me an email", "Email", "Email",
  "This Action will send you an HTML email.",
  [f("subject", "Subject"), f("body", "Body")]),
 # productivity
 ("sheets.add_row", "Add row to spreadsheet", "Google Sheets", "Productivity",
  "This Action will add a row to the bottom of the first worksheet of a spreadsheet.",
  [f("spreadsheet", "Spreadsheet"), f("formatted_row", "Formatted row"), f("drive_folder_path", "Drive folder path", required=False)]),
 ("evernote.create_note", "Create a note", "Evernote", "Productivity",
  "This Action will create a new note in the notebook you specify.",
  [f("title", "Title"), f("body", "Body"), f("notebook", "Notebook", required=False), f("tags", "Tags", required=False)]),
 ("todoist.create_task", "Create task", "Todoist", "Productivity",
  "This Action will create a new task in a project.",
  [f("task_content", "Task content"), f("project", "Project", required=False), f("due_date", "Due date", required=False, dt=D)]),
 ("trello.create_card", "Create a card", "Trello", "Productivity",
  "This Action will create a card on a board list.",
  [f("board", "Board"), f("list", "List"), f("title", "Title"), f("description", "Description", required=False)]),
 ("notion.create_page", "Create a page", "Notion", "Productivity",
  "This Action will create a page inside a database.",
  [f("database", "Database"), f("title", "Title"), f("content", "Content", required=False)]),
 ("github.create_issue", "Create an issue", "GitHub", "Productivity",
  "This Action will open an issue in a repository.",
  [f("repository", "Repository"), f("title", "Title"), f("body", "Body", required=False)]),
 # calendar
 ("gcal.quick_add_event", "Quick add event", "Google Calendar", "Calendars & scheduling",
  "This Action will add an event to your calendar from a short text.",
  [f("quick_add_text", "Quick add text")]),
 ("gcal.create_detailed_event", "Create a detailed event", "Google Calendar", "Calendars & scheduling",
  "This Action will add an event with a start, end and place.",
  [f("title", "Title"), f("start_time", "Start time", dt=DT), f("end_time", "End time", dt=DT), f("location", "Location", required=False)]),
 # social
 ("twitter.post_tweet", "Post a tweet", "Twitter", "Social networks",
  "This Action will post a new tweet to your account.",
  [f("tweet_text", "Tweet text")]),
 ("twitter.post_tweet_with_image", "Post a tweet with image", "Twitter", "Social networks",
  "This Action will post a tweet with an attached image.",
  [f("tweet_text", "Tweet text"), f("image_url", "Image URL", dt=I)]),
 ("facebook.create_link_post", "Create a link post", "Facebook", "Social networks",
  "This Action will share a link on your timeline.",
  [f("link_url", "Link URL", dt=U), f("message", "Message", required=False)]),
 ("linkedin.share_update", "Share an update", "LinkedIn", "Social networks",
  "This Action will share an update with your network.",
  [f("content", "Content")]),
 ("reddit.submit_link", "Submit a new link", "Reddit", "Social networks",
  "This Action will submit a link post to a subreddit.",
  [f("subreddit", "Subreddit"), f("title", "Title"), f("url", "URL", dt=U)]),
 # storage / photo
 ("dropbox.add_file_from_url", "Add file from URL", "Dropbox", "Cloud storage",
  "This Action will download a file at a given URL and add it to a folder.",
  [f("file_url", "File URL", dt=U), f("file_name", "File name", required=False), f("folder_path", "Folder path", required=False)]),
 ("gdrive.upload_file_from_url", "Upload file from URL", "Google Drive", "Cloud storage",
  "This Action will download a file and save it to your drive.",
  [f("file_url", "File URL", dt=U), f("filename", "Filename", required=False)]),
 ("gphotos.upload_photo", "Upload photo from URL", "Google Photos", "Photo & video",
  "This Action will save a photo to an album.",
  [f("photo_url", "Photo URL", dt=I), f("album", "Album", required=False), f("description", "Description", required=False)]),
 ("pinterest.create_pin", "Create a pin", "Pinterest", "Photo & video",
  "This Action will create a pin on one of your boards.",
  [f("board", "Board"), f("image_url", "Image URL", dt=I), f("description", "Description", required=False)]),
 # music / health / location
 ("spotify.save_track", "Save a track", "Spotify", "Music",
  "This Action will save a song to your library.",
  [f("track_query", "Track search query")]),
 ("spotify.add_to_playlist", "Add track in a playlist", "Spotify", "Music",
  "This Action will search for a song and add it in a playlist.",
  [f("track_query", "Track search query"), f("playlist", "Playlist")]),
 ("sonos.play_favorite", "Play favorite", "Sonos", "Music",
  "This Action will play one of your favourites on a speaker.",
  [f("speaker", "Speaker"), f("favorite", "Favourite")]),
 ("fitbit.log_weight", "Log your weight", "Fitbit", "Health & fitness",
  "This Action will record a weight entry in your log.",
  [f("weight", "Weight", dt=N)]),
 ("strava.create_activity", "Create a manual activity", "Strava", "Health & fitness",
  "This Action will add a manual workout entry.",
  [f("name", "Name"), f("activity_type", "Activity type"), f("duration", "Duration", dt=N)]),
 ("health.log_water", "Log water intake", "Health Mate", "Health & fitness",
  "This Action will record a glass of water.",
  [f("amount_ml", "Amount in ml", dt=N)]),
 ("android.set_wallpaper", "Update device wallpaper", "Android Device", "Photo & video",
  "This Action will update the wallpaper on your phone.",
  [f("photo_url", "Photo URL", dt=I)]),
]

def entry(t, trig):
    e = {"id": t[0], "function_name": t[1], "channel": t[2], "category": t[3], "description": t[4], "fields": t[5]}
    if trig:
        e["ingredients"] = t[6]
    return e

cats = sorted({t[3] for t in T} | {a[3] for a in A})
doc = {"categories": cats, "triggers": [entry(t, True) for t in T], "actions": [entry(a, False) for a in A]}
assert len({x[0] for x in T + A}) == len(T) + len(A)
print(len(T), "triggers", len(A), "actions")
with open("data/synthetic_catalog.json", "w") as fh:
    json.dump(doc, fh, indent=2, ensure_ascii=False)
    fh.write("\n")
