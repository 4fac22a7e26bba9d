//! The bundled 18 mental-health injection topics (Finnish lemmas).

pub(crate) const BUNDLED_TOPICS: &[(&str, &[&str])] = &[
    (
        "Suicide",
        &["itsemurha", "itsemurhayritys", "itsetuhoisuus", "toivottomuus", "hengenvaara", "kuolemanajatus"],
    ),
    (
        "Anxiety",
        &["ahdistus", "paniikki", "paniikkikohtaus", "jännittäminen", "huoli", "pelko"],
    ),
    (
        "Depression",
        &["masennus", "alakulo", "surullinen", "väsymys", "itku", "suru"],
    ),
    (
        "Mental Health",
        &["mielenterveys", "mielenterveysongelma", "hyvinvointi", "jaksaminen", "mielenterveyspalvelu", "oire"],
    ),
    (
        "Social Isolation",
        &["yksinäisyys", "yksinäinen", "eristäytyminen", "ulkopuolisuus", "syrjäytyminen", "kaveriton"],
    ),
    (
        "Psychosis",
        &["psykoosi", "hallusinaatio", "harhaluulo", "vainoharha", "psykoottinen", "harha"],
    ),
    (
        "Schizophrenia",
        &["skitsofrenia", "skitsofreenikko", "skitsofreeninen", "antipsykootti", "psykiatri"],
    ),
    (
        "Trauma",
        &["trauma", "traumaattinen", "väkivalta", "hyväksikäyttö", "kaltoinkohtelu", "ptsd"],
    ),
    (
        "Substance Use",
        &["päihde", "kannabis", "huume", "alkoholi", "addiktio", "riippuvuus"],
    ),
    (
        "Self-harm",
        &["viiltely", "itsetuho", "arpi", "vahingoittaa", "satuttaa", "haava"],
    ),
    (
        "Eating Disorders",
        &["syömishäiriö", "anoreksia", "bulimia", "laihdutus", "ahmiminen", "ruokavalio"],
    ),
    (
        "Treatment",
        &["hoito", "terapia", "psykoterapia", "lääke", "hoitaja", "sairaala"],
    ),
    (
        "Peer Support",
        &["vertaistuki", "tuki", "tukea", "kuunnella", "neuvonta", "tsemppiä"],
    ),
    (
        "Neurodevelopmental",
        &["adhd", "autismi", "neuropsykiatrinen", "keskittymishäiriö", "asperger"],
    ),
    (
        "Personality Disorders",
        &["persoonallisuushäiriö", "rajatila", "epävakaa", "narsismi", "kaksisuuntainen", "mielialahäiriö"],
    ),
    (
        "Stress and Burnout",
        &["stressi", "uupumus", "burnout", "paine", "kuormitus", "unettomuus"],
    ),
    (
        "Hate and Bullying",
        &["vihapuhe", "kiusaaminen", "kiusattu", "viha", "häirintä", "syrjintä"],
    ),
    (
        "Family and Relationships",
        &["perhe", "parisuhde", "avioero", "huolestua", "erottaa", "riita"],
    ),
];
