import pytest

from stocktext.market_data import parse_ohlc_csv

# Yahoo Finance rows for TSLA, 10-16 July 2020, as published.
TABLE2_CSV = """Date,Open,High,Low,Close,Adj Close,Volume
10/07/2020,279.2,309.784,275.202,308.93,308.93,1.17E+08
13/07/2020,331.8,358.998,294.222,299.412,299.412,1.95E+08
14/07/2020,311.2,318,286.2,303.36,303.36,1.17E+08
15/07/2020, 308.6, 310, 291.4, 309.202, 309.202, 81839000
16/07/2020,295.432,306.342,293.2,300.128,300.128,71504000
"""

# StockTwits rows; the published ids are spreadsheet-mangled, so distinct ids
# are substituted here.
TABLE1_CSV = """Symbol,Message,Datetime,User,Message_Id
TSLA,$TSLA trash,2020-07-16T23:08:47Z,3796654,228000001
TSLA,"$TSLA https://www.tesmanian.com/blogs/tesmanian-blog/tesla-entering-greek-market 🏎🤏",2020-07-16T23:06:01Z,335497,228000002
TSLA,"$TSLA what's happening here? Considerin selling out tomorrow! Convince me otherwise",2020-07-16T23:04:50Z,3572445,228000003
TSLA,$BB https://publishing.ninja/V4/page/10630/414/270/1 $TSLA,2020-07-16T23:03:55Z,1711636,228471610
"""


@pytest.fixture
def table2():
    return parse_ohlc_csv(TABLE2_CSV, symbol="TSLA", date_format="dmy")
